//! The five-step game: device verification, encoding, count check, encoding
//! check and decoding, repeated per domino, followed by adjudication.

mod devices;
mod pool;
mod steps;
mod transcript;

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use devices::{
    Branch, ClassicalMixer, Devices, ForgetfulMeter, Meter, Mixer, ProjectiveMeter, QuantumMixer, RiggedMixer,
};
pub use pool::{Execution, Label, LabeledBox, Measured, Mode, Pool};
pub use steps::{
    adjudicate, step1_verify_devices, step2_check_encoding, step3_count_check, step4_encoding_check, step5_decode,
    Adjudication,
};
pub use transcript::{
    Agent, DominoRecord, Failure, GameTranscript, Message, MeasurementRecord, PoolSizes, Step1Record, Step2Record,
    Step3Record, Step4Record, Step5Record,
};

use crate::classical::ClassicalBox;
use crate::error::{Error, Result};
use crate::pcp::{Arrangement, Domino, PcpInstance, SearchBudget};
use crate::physics::{BoxPhysics, Side};
use crate::quantum::QuantumBox;
use crate::scalar::{parse_decimal, pow10, Probability, Rational};
use crate::strategies::PlayerStrategy;

/// Box state type used for classical play.
pub type ClassicalPhysics = ClassicalBox<Rational>;
/// Box state type used for quantum play.
pub type QuantumPhysics = QuantumBox<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Significance of the two-sided binomial test on post-mix outcomes.
    pub step1_alpha: f64,
    /// Allowed `|n(hh)·n(tt) − n(ht)·n(th)|` as a fraction of total².
    pub step3_eps: f64,
    /// Allowed deviation of V2's observed h-frequencies from `k` and `q`.
    pub step4_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { step1_alpha: 1e-6, step3_eps: 0.01, step4_eps: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub solver: SearchBudget,
    pub referee: SearchBudget,
}

impl Default for Budgets {
    fn default() -> Self {
        Self { solver: SearchBudget::new(100_000, 32), referee: SearchBudget::new(1_000_000, 64) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub mode: Mode,
    /// The constant `c` in the per-stage box count `c·10^(2l)`.
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub n_constant: Rational,
    pub tolerances: Tolerances,
    pub budgets: Budgets,
    pub seed: u64,
    /// Mix-and-measure rounds V1 runs on the verification half.
    pub step1_rounds: u32,
    /// Digits the referee reads beyond the longest string length.
    pub decode_extra_digits: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            n_constant: Rational::one(),
            tolerances: Tolerances::default(),
            budgets: Budgets::default(),
            seed: 0,
            step1_rounds: 2,
            decode_extra_digits: 0,
        }
    }
}

impl GameConfig {
    pub fn exact(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn sampled(seed: u64) -> Self {
        Self { mode: Mode::Sampled, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [("step1_alpha", t.step1_alpha), ("step3_eps", t.step3_eps), ("step4_eps", t.step4_eps)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        for (name, b) in [("solver", self.budgets.solver), ("referee", self.budgets.referee)] {
            if b.max_expansions == 0 || b.max_length == 0 {
                return Err(Error::Config(format!("{name} budget must be positive")));
            }
        }
        if !self.n_constant.is_positive() {
            return Err(Error::Config("n_constant must be positive".into()));
        }
        if self.step1_rounds == 0 {
            return Err(Error::Config("step1_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn de_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let text = String::deserialize(d)?;
    parse_decimal(&text)
        .or_else(|| text.parse().ok())
        .ok_or_else(|| serde::de::Error::custom(format!("not a rational number: {text}")))
}

/// Largest per-domino box count the sampler supports (counts travel through `f64`).
pub const MAX_BOXES: u64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxBudget {
    pub l_max: usize,
    /// Smallest `k_i` or `q_i` in the instance.
    pub p_min: String,
    /// Boxes the referee ends up with.
    pub n_prime: u64,
    /// Boxes Alice starts each domino with.
    pub n: u64,
}

/// Boxes per domino: `24·⌈c·10^(2(l_max+1))/p_min⌉` when sampling, 24 in exact mode.
pub fn required_boxes(instance: &PcpInstance, config: &GameConfig) -> Result<BoxBudget> {
    let l_max = instance.max_string_len();
    let p_min = instance.min_probability();
    if config.mode == Mode::Exact {
        return Ok(BoxBudget { l_max, p_min: p_min.to_string(), n_prime: 1, n: 24 });
    }
    let raw = config.n_constant.clone() * pow10(2 * (l_max + 1)) / p_min.value().clone();
    let (q, r) = raw.numer().div_rem(raw.denom());
    let n_prime = if r.is_zero() { q } else { q + 1u32 };
    let n = n_prime.clone() * 24u32;
    let too_big = || Error::Config(format!("box budget {n} exceeds the sampler limit of {MAX_BOXES}"));
    let n_u64: u64 = (&n).try_into().map_err(|_| too_big())?;
    if n_u64 > MAX_BOXES {
        return Err(too_big());
    }
    let n_prime: u64 = (&n_prime).try_into().map_err(|_| too_big())?;
    Ok(BoxBudget { l_max, p_min: p_min.to_string(), n_prime, n: n_u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Win,
    Lose,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Win => "win",
            Verdict::Lose => "lose",
        })
    }
}

/// Where a losing game was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureSite {
    /// The claim names a domino the instance does not have.
    Claim,
    Step1,
    Step2,
    Step3,
    Step4,
    #[serde(rename = "step5-decode")]
    Step5Decode,
    /// The claimed arrangement does not match the decoded dominoes.
    #[serde(rename = "step5-mismatch")]
    Step5Mismatch,
    /// "no match" was claimed and the referee found one.
    RefereeFoundMatch,
}

impl fmt::Display for FailureSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("plain enum");
        f.write_str(s.as_str().expect("string tag"))
    }
}

/// V2's hint telling the referee which compartment to decode first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub direction: Side,
}

impl Instruction {
    /// `L` iff `k ≤ q`.
    pub fn for_domino(domino: &Domino) -> Self {
        let direction = if domino.k().value() <= domino.q().value() { Side::Left } else { Side::Right };
        Self { direction }
    }
}

/// A box pool of either physics.
#[derive(Debug, Clone)]
pub enum AnyPool {
    Classical(Pool<ClassicalPhysics>),
    Quantum(Pool<QuantumPhysics>),
}

#[derive(Debug, Clone)]
pub enum AnyDevices {
    Classical(Devices<ClassicalPhysics>),
    Quantum(Devices<QuantumPhysics>),
}

/// Converts a concrete pool to and from [`AnyPool`].
pub trait Physics: BoxPhysics {
    fn wrap(pool: Pool<Self>) -> AnyPool;
    fn unwrap(pool: AnyPool) -> Option<Pool<Self>>;
}

impl Physics for ClassicalPhysics {
    fn wrap(pool: Pool<Self>) -> AnyPool {
        AnyPool::Classical(pool)
    }

    fn unwrap(pool: AnyPool) -> Option<Pool<Self>> {
        match pool {
            AnyPool::Classical(p) => Some(p),
            AnyPool::Quantum(_) => None,
        }
    }
}

impl Physics for QuantumPhysics {
    fn wrap(pool: Pool<Self>) -> AnyPool {
        AnyPool::Quantum(pool)
    }

    fn unwrap(pool: AnyPool) -> Option<Pool<Self>> {
        match pool {
            AnyPool::Quantum(p) => Some(p),
            AnyPool::Classical(_) => None,
        }
    }
}

/// Everything needed to play one domino, shared by the per-physics driver.
struct DominoContext<'a> {
    index: usize,
    domino: &'a Domino,
    n_boxes: u64,
    max_digits: usize,
    config: &'a GameConfig,
    strategy: &'a dyn PlayerStrategy,
}

enum DominoOutcome {
    Decoded(Domino),
    Failed(Failure),
}

/// Plays every domino of `instance` and adjudicates the strategy's claim.
pub fn run_game(instance: &PcpInstance, strategy: &dyn PlayerStrategy, config: &GameConfig) -> Result<GameTranscript> {
    config.validate()?;
    let budget = required_boxes(instance, config)?;
    let max_digits = budget.l_max + config.decode_extra_digits;
    let mut exec = Execution::new(config.mode, config.seed);
    let mut tx = GameTranscript::new(instance.clone(), strategy.name(), config.clone(), budget.clone());

    tx.log(Agent::V2, Agent::Alice, None, format!("instance with {} dominoes", instance.len()));
    let claim = strategy.claim(instance);
    tx.log(Agent::Alice, Agent::Referee, None, format!("claim: {claim}"));
    tx.claim = claim.clone();

    if let Arrangement::Order(indices) = &claim {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > instance.len()) {
            tx.fail(Failure::new(FailureSite::Claim, None, format!("claim names A{bad}, instance has {}", instance.len())));
            return Ok(tx);
        }
    }

    let mut decoded = Vec::with_capacity(instance.len());
    for (i, domino) in instance.dominoes().iter().enumerate() {
        let ctx = DominoContext {
            index: i + 1,
            domino,
            n_boxes: budget.n,
            max_digits,
            config,
            strategy,
        };
        let boxes = strategy.provide_boxes(domino, ctx.index, budget.n, &mut exec);
        let devices = strategy.provide_devices(ctx.index);
        let outcome = match (boxes, devices) {
            (AnyPool::Classical(p), AnyDevices::Classical(d)) => play_domino(&ctx, p, d, &mut exec, &mut tx),
            (AnyPool::Quantum(p), AnyDevices::Quantum(d)) => play_domino(&ctx, p, d, &mut exec, &mut tx),
            _ => DominoOutcome::Failed(Failure::new(
                FailureSite::Step1,
                Some(ctx.index),
                "boxes and devices belong to different physics".into(),
            )),
        };
        match outcome {
            DominoOutcome::Decoded(d) => decoded.push(d),
            DominoOutcome::Failed(f) => {
                tx.decoded = decoded;
                tx.fail(f);
                return Ok(tx);
            }
        }
    }

    let decoded_instance = PcpInstance::new(decoded.clone())?;
    tx.decoded = decoded;
    let adjudication = adjudicate(&claim, &decoded_instance, config.budgets.referee)?;
    tx.log(Agent::Referee, Agent::Alice, None, format!("verdict: {}", adjudication.verdict));
    match adjudication.failure_site {
        Some(site) => {
            let detail = adjudication.detail.clone();
            tx.adjudication = Some(adjudication);
            tx.fail(Failure::new(site, None, detail));
        }
        None => {
            tx.adjudication = Some(adjudication);
            tx.verdict = Verdict::Win;
        }
    }
    Ok(tx)
}

fn play_domino<P: Physics>(
    ctx: &DominoContext<'_>,
    boxes: Pool<P>,
    devices: Devices<P>,
    exec: &mut Execution,
    tx: &mut GameTranscript,
) -> DominoOutcome {
    let idx = Some(ctx.index);
    let fail = |site, detail: String| DominoOutcome::Failed(Failure::new(site, idx, detail));
    let mut record = DominoRecord::new(ctx.index, ctx.domino, P::kind());
    record.devices = format!("meter={}, mixer={}", devices.meter.name(), devices.mixer.name());
    tx.log(
        Agent::Alice,
        Agent::V1,
        idx,
        format!("{} {} boxes with devices ({})", boxes.total(), P::kind(), record.devices),
    );
    record.pool_sizes.submitted = boxes.total().to_string();

    let expected = P::Prob::from_count(ctx.n_boxes);
    let submitted = boxes.total();
    let wrong_count = !submitted.is_close(&expected);
    let wrong_label = boxes.boxes().iter().any(|b| b.label != Label::Unverified);
    if wrong_count || wrong_label {
        tx.push_record(record);
        let why = if wrong_count {
            format!("expected {} boxes, received {}", ctx.n_boxes, submitted)
        } else {
            "submitted boxes must be unverified".to_string()
        };
        return fail(FailureSite::Step1, why);
    }

    // Step 1
    let (s1, mixed) = step1_verify_devices(boxes, &devices, ctx.config, exec);
    let passed = s1.passed;
    record.step1 = Some(s1);
    let Some(mixed) = mixed.filter(|_| passed) else {
        tx.push_record(record);
        return fail(FailureSite::Step1, "device verification failed".into());
    };
    record.pool_sizes.after_step1 = mixed.total().to_string();
    tx.log(Agent::V1, Agent::Alice, idx, format!("{} mixed boxes", mixed.total()));

    // Step 2
    let mixed_total = mixed.total();
    let encoded = ctx.strategy.encode(P::wrap(mixed), ctx.domino, ctx.index, exec);
    let encoded = P::unwrap(encoded);
    let s2 = step2_check_encoding(&mixed_total, encoded.as_ref(), exec);
    let passed = s2.passed;
    record.step2 = Some(s2);
    let Some(encoded) = encoded.filter(|_| passed) else {
        tx.push_record(record);
        return fail(FailureSite::Step2, "encoded pool is not a quarter of the mixed boxes".into());
    };
    record.pool_sizes.after_step2 = encoded.total().to_string();
    tx.log(Agent::Alice, Agent::V1, idx, format!("{} encoded boxes", encoded.total()));

    // Step 3
    let s3 = step3_count_check(&encoded, ctx.config);
    let passed = s3.passed;
    record.step3 = Some(s3);
    if !passed {
        tx.push_record(record);
        return fail(FailureSite::Step3, "label counts violate n(hh)·n(tt) = n(ht)·n(th)".into());
    }
    tx.log(Agent::V1, Agent::V2, idx, format!("devices and {} encoded boxes", encoded.total()));

    // Step 4
    let (s4, forwarded) = step4_encoding_check(encoded, ctx.domino, &devices, ctx.config, exec);
    let passed = s4.passed;
    record.step4 = Some(s4);
    let Some((instruction, remaining)) = forwarded.filter(|_| passed) else {
        tx.push_record(record);
        return fail(FailureSite::Step4, "observed marginals differ from k and q".into());
    };
    record.pool_sizes.after_step4 = remaining.total().to_string();
    tx.log(
        Agent::V2,
        Agent::Referee,
        idx,
        format!("{} boxes, devices, instruction {}", remaining.total(), instruction.direction),
    );

    // Step 5
    let (s5, decoded) = step5_decode(remaining, instruction, ctx.max_digits, &devices, exec);
    record.step5 = Some(s5);
    tx.push_record(record);
    match decoded {
        Ok(d) => DominoOutcome::Decoded(d),
        Err(why) => fail(FailureSite::Step5Decode, why),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_matches_hand_computation() {
        let inst = PcpInstance::from_pairs(&[("121", "34"), ("2", "4")]).unwrap();
        let cfg = GameConfig::sampled(0);
        let b = required_boxes(&inst, &cfg).unwrap();
        assert_eq!(b.l_max, 3);
        // 10^8 / 0.121 = 826446280.99...
        assert_eq!(b.n_prime, 826_446_281);
        assert_eq!(b.n, 24 * 826_446_281);
        assert_eq!(required_boxes(&inst, &GameConfig::exact(0)).unwrap().n, 24);
    }

    #[test]
    fn oversized_budget_is_rejected() {
        let inst = PcpInstance::from_pairs(&[("1234123", "1")]).unwrap();
        assert!(matches!(required_boxes(&inst, &GameConfig::sampled(0)), Err(Error::Config(_))));
    }

    #[test]
    fn instruction_ties_go_left() {
        let d = Domino::new("12", "12").unwrap();
        assert_eq!(Instruction::for_domino(&d).direction, Side::Left);
        let d = Domino::new("34", "121").unwrap();
        assert_eq!(Instruction::for_domino(&d).direction, Side::Right);
    }

    #[test]
    fn config_validation() {
        let mut cfg = GameConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.tolerances.step3_eps = 0.0;
        assert!(cfg.validate().is_err());
        let json = serde_json::to_string(&GameConfig::default()).unwrap();
        let back: GameConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, GameConfig::default());
    }
}
