//! The individual verification and decoding steps, generic over box physics.

use num_traits::Zero;
use statrs::distribution::{Binomial, Discrete};

use super::devices::Devices;
use super::pool::{Execution, Label, Pool};
use super::transcript::{MeasurementRecord, Step1Record, Step2Record, Step3Record, Step4Record, Step5Record};
use super::{FailureSite, GameConfig, Instruction, Verdict};
use crate::error::Result;
use crate::pcp::{check_arrangement, probability_to_string, search, Arrangement, Domino, MatchSearch, PcpInstance, SearchBudget};
use crate::physics::{BoxPhysics, Joint, Side};
use crate::scalar::Probability;

/// Two-sided exact binomial test of `h` successes in `n` trials against `p = ½`.
///
/// statrs' cdf goes through the incomplete beta function, which returns garbage
/// (even negative values) near the centre once `n` is around 10^8. The tail is
/// summed term by term from `ln_pmf` instead, which stays accurate at any `n`.
fn binomial_p_value(h: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let dist = Binomial::new(0.5, n).expect("valid binomial");
    let m = h.min(n - h);
    if 2 * m == n {
        return 1.0;
    }
    // P(X ≤ m) = pmf(m)·Σ_j Π pmf(i-1)/pmf(i), with pmf(i-1)/pmf(i) = i/(n-i+1)
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut i = m;
    while i > 0 && term > sum * 1e-17 {
        term *= i as f64 / (n - i + 1) as f64;
        sum += term;
        i -= 1;
    }
    (2.0 * (dist.ln_pmf(m) + sum.ln()).exp()).min(1.0)
}

fn ratio<T: Probability>(num: &T, den: &T) -> Option<T> {
    if den.is_zero_ish() {
        None
    } else {
        Some(num.clone() / den.clone())
    }
}

/// One measurement pass on `side` with a stability remeasurement of every branch.
fn measure_stable<P: BoxPhysics>(
    pool: Pool<P>,
    side: Side,
    devices: &Devices<P>,
    exec: &mut Execution,
) -> (Pool<P>, P::Prob, P::Prob, bool) {
    let first = pool.measure(side, devices.meter.as_ref(), exec);
    let h = first.heads.total();
    let t = first.tails.total();
    let again_h = first.heads.measure(side, devices.meter.as_ref(), exec);
    let again_t = first.tails.measure(side, devices.meter.as_ref(), exec);
    let stable = again_h.tails.is_empty() && again_t.heads.is_empty();
    let mut collapsed = again_h.rejoin();
    collapsed.extend(again_t.rejoin());
    collapsed.compact();
    (collapsed, h, t, stable)
}

/// V1 checks the devices on a random half and mixes the other half.
///
/// Each round measures both compartments (twice, to check the outcome repeats)
/// and then mixes; every round after the first also tests that post-mix
/// outcomes are equally likely.
pub fn step1_verify_devices<P: BoxPhysics>(
    mut boxes: Pool<P>,
    devices: &Devices<P>,
    config: &GameConfig,
    exec: &mut Execution,
) -> (Step1Record, Option<Pool<P>>) {
    let mut verification = boxes.take_fraction(1, 2, exec);
    let mut record = Step1Record { verification_boxes: verification.total().to_string(), ..Default::default() };
    let half = P::Prob::half();
    let mut passed = true;
    for round in 0..=config.step1_rounds {
        for side in [Side::Left, Side::Right] {
            let (collapsed, h, t, stable) = measure_stable(verification, side, devices, exec);
            verification = collapsed;
            let total = h.clone() + t.clone();
            let tested = round > 0;
            let (ok, p_value) = if !tested {
                (stable, None)
            } else if exec.is_exact() {
                let freq_ok = ratio(&h, &total).is_some_and(|f| f.is_close(&half));
                (stable && freq_ok, None)
            } else {
                let p = binomial_p_value(h.to_count(), total.to_count());
                (stable && p >= config.tolerances.step1_alpha, Some(p))
            };
            record.rounds.push(MeasurementRecord {
                round,
                side,
                h: h.to_string(),
                t: t.to_string(),
                stable,
                p_value,
                passed: ok,
            });
            passed &= ok;
        }
        if !passed {
            break;
        }
        if round < config.step1_rounds {
            let mixer = devices.mixer.clone();
            verification = verification.map_states(|s| mixer.mix(s));
        }
    }
    record.passed = passed;
    if !passed {
        return (record, None);
    }
    let mixer = devices.mixer.clone();
    let mixed = boxes.map_states(|s| mixer.mix(s)).relabel(Label::Mixed);
    record.passed = mixed.is_some();
    record.mixed_boxes = mixed.as_ref().map(|p| p.total().to_string()).unwrap_or_default();
    (record, mixed)
}

/// Checks that Alice returned exactly a quarter of the mixed pool with legal labels.
pub fn step2_check_encoding<P: BoxPhysics>(
    mixed_total: &P::Prob,
    encoded: Option<&Pool<P>>,
    exec: &Execution,
) -> Step2Record {
    let expected = exec.fraction(mixed_total, 1, 4);
    let discarded = mixed_total.clone() - expected.clone();
    let Some(encoded) = encoded else {
        return Step2Record {
            passed: false,
            expected: expected.to_string(),
            returned: "0".into(),
            discarded: discarded.to_string(),
            labels: Default::default(),
        };
    };
    let returned = encoded.total();
    let labels_ok = encoded.boxes().iter().all(|b| b.label != Label::Unverified);
    let mut labels = std::collections::BTreeMap::new();
    for b in encoded.boxes() {
        let entry = labels.entry(b.label.to_string()).or_insert_with(P::Prob::zero);
        *entry = entry.clone() + b.count.clone();
    }
    Step2Record {
        passed: labels_ok && returned.is_close(&expected),
        expected: expected.to_string(),
        returned: returned.to_string(),
        discarded: discarded.to_string(),
        labels: labels.into_iter().map(|(k, v)| (k, v.to_string())).collect(),
    }
}

/// V1's product check on label counts; a `mixed` box counts ¼ toward every outcome.
pub fn step3_count_check<P: BoxPhysics>(encoded: &Pool<P>, config: &GameConfig) -> Step3Record {
    let quarter = encoded.count_label(Label::Mixed) / P::Prob::from_count(4);
    let n = Joint::ALL.map(|j| encoded.count_label(Label::Outcome(j)) + quarter.clone());
    let unlabeled = !encoded.count_label(Label::Unverified).is_zero_ish();
    let lhs = n[0].clone() * n[3].clone();
    let rhs = n[1].clone() * n[2].clone();
    let total = encoded.total();
    let passed = !unlabeled
        && match config.mode {
            super::Mode::Exact => lhs.is_close(&rhs),
            super::Mode::Sampled => {
                let delta = (lhs.approx_f64() - rhs.approx_f64()).abs();
                let t = total.approx_f64();
                delta <= config.tolerances.step3_eps * t * t
            }
        };
    Step3Record {
        passed,
        counts: n.map(|c| c.to_string()),
        product_diagonal: lhs.to_string(),
        product_off_diagonal: rhs.to_string(),
    }
}

fn within<T: Probability>(observed: &T, target: &T, eps: f64, exact: bool) -> bool {
    if exact {
        observed.is_close(target)
    } else {
        (observed.approx_f64() - target.approx_f64()).abs() <= eps
    }
}

/// V2 measures left compartments of one random third and right compartments of
/// a disjoint third, compares the h-frequencies with `k` and `q`, and forwards
/// the last third with the instruction.
pub fn step4_encoding_check<P: BoxPhysics>(
    mut encoded: Pool<P>,
    domino: &Domino,
    devices: &Devices<P>,
    config: &GameConfig,
    exec: &mut Execution,
) -> (Step4Record, Option<(Instruction, Pool<P>)>) {
    let total = encoded.total();
    let third = exec.fraction(&total, 1, 3);
    let left = encoded.take(&third, exec);
    let right = encoded.take(&third, exec);
    let exact = exec.is_exact();
    let eps = config.tolerances.step4_eps;
    let instruction = Instruction::for_domino(domino);

    let mut observe = |pool: Pool<P>, side: Side| {
        let n = pool.total();
        let m = pool.measure(side, devices.meter.as_ref(), exec);
        (n.clone(), ratio(&m.heads.total(), &n))
    };
    let (n_left, f_left) = observe(left, Side::Left);
    let (n_right, f_right) = observe(right, Side::Right);
    let k: P::Prob = domino.k().as_scalar();
    let q: P::Prob = domino.q().as_scalar();
    let ok_left = f_left.as_ref().is_some_and(|f| within(f, &k, eps, exact));
    let ok_right = f_right.as_ref().is_some_and(|f| within(f, &q, eps, exact));
    let passed = ok_left && ok_right && !encoded.is_empty();
    let record = Step4Record {
        passed,
        left_measured: n_left.to_string(),
        left_h_frequency: f_left.map(|f| f.to_string()),
        right_measured: n_right.to_string(),
        right_h_frequency: f_right.map(|f| f.to_string()),
        instruction: instruction.direction,
        forwarded: encoded.total().to_string(),
    };
    (record, passed.then_some((instruction, encoded)))
}

/// The referee decodes the instructed side first, keeps the `h` boxes and
/// decodes the other side on them.
pub fn step5_decode<P: BoxPhysics>(
    boxes: Pool<P>,
    instruction: Instruction,
    max_digits: usize,
    devices: &Devices<P>,
    exec: &mut Execution,
) -> (Step5Record, std::result::Result<Domino, String>) {
    let first_side = instruction.direction;
    let mut record = Step5Record { first_side, received: boxes.total().to_string(), ..Default::default() };
    let n = boxes.total();
    let first = boxes.measure(first_side, devices.meter.as_ref(), exec);
    let Some(f1) = ratio(&first.heads.total(), &n) else {
        return (record, Err("no boxes to decode".into()));
    };
    record.first_h_frequency = f1.to_string();
    let survivors = first.heads;
    let n2 = survivors.total();
    record.survivors = n2.to_string();
    let second = survivors.measure(first_side.other(), devices.meter.as_ref(), exec);
    let Some(f2) = ratio(&second.heads.total(), &n2) else {
        return (record, Err("every box was discarded".into()));
    };
    record.second_h_frequency = f2.to_string();
    let decode = |f: &P::Prob, which: &str| probability_to_string(f, max_digits).map_err(|e| format!("{which} string: {e}"));
    let (s1, s2) = match (decode(&f1, "first"), decode(&f2, "second")) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return (record, Err(e)),
    };
    record.first_string = s1.clone();
    record.second_string = s2.clone();
    let (num, den) = match first_side {
        Side::Left => (s1, s2),
        Side::Right => (s2, s1),
    };
    match Domino::new(num, den) {
        Ok(d) => {
            record.decoded = Some(d.clone());
            (record, Ok(d))
        }
        Err(e) => (record, Err(format!("decoded strings are not a domino: {e}"))),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Adjudication {
    pub verdict: Verdict,
    pub failure_site: Option<FailureSite>,
    pub detail: String,
    /// States the referee expanded while searching for a match, for "no match" claims.
    pub referee_expansions: Option<usize>,
}

/// Checks the claim against the decoded dominoes.
pub fn adjudicate(claim: &Arrangement, decoded: &PcpInstance, referee: SearchBudget) -> Result<Adjudication> {
    match claim {
        Arrangement::Order(_) => {
            let ok = check_arrangement(decoded, claim)?;
            Ok(Adjudication {
                verdict: if ok { Verdict::Win } else { Verdict::Lose },
                failure_site: (!ok).then_some(FailureSite::Step5Mismatch),
                detail: if ok {
                    format!("{claim} matches the decoded dominoes")
                } else {
                    format!("{claim} does not match the decoded dominoes")
                },
                referee_expansions: None,
            })
        }
        Arrangement::NoMatch => {
            let report = search(decoded, referee);
            Ok(match report.outcome {
                MatchSearch::Found(arr) => Adjudication {
                    verdict: Verdict::Lose,
                    failure_site: Some(FailureSite::RefereeFoundMatch),
                    detail: format!("referee found {arr}"),
                    referee_expansions: Some(report.expansions),
                },
                MatchSearch::NoneWithinBudget => Adjudication {
                    verdict: Verdict::Win,
                    failure_site: None,
                    detail: "referee found no match within budget".into(),
                    referee_expansions: Some(report.expansions),
                },
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{product_box, ClassicalBox};
    use crate::protocol::{Mode, RiggedMixer};
    use crate::protocol::devices::{ForgetfulMeter, ClassicalMixer};
    use crate::scalar::Rational;

    type B = ClassicalBox<Rational>;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn labeled(counts: [i64; 4], mixed: i64) -> Pool<B> {
        let mut exec = Execution::new(Mode::Exact, 0);
        let mut pool = Pool::new();
        for (j, c) in Joint::ALL.into_iter().zip(counts) {
            pool.push(B::basis(j), Label::Outcome(j), rat(c, 1), &mut exec);
        }
        pool.push(B::uniform(), Label::Mixed, rat(mixed, 1), &mut exec);
        pool
    }

    #[test]
    fn p_values() {
        assert!((binomial_p_value(10, 20) - 1.0).abs() < 1e-12);
        assert!(binomial_p_value(20, 20) < 1e-5);
        assert!(binomial_p_value(0, 20) < 1e-5);
        // P(X ≤ 2) for n = 10 is 56/1024.
        assert!((binomial_p_value(2, 10) - 112.0 / 1024.0).abs() < 1e-12);
        // reference values from scipy.stats.binomtest
        assert!((binomial_p_value(7, 40) - 4.2277022657799534e-05).abs() < 1e-15);
        assert!((binomial_p_value(49_999_994, 100_000_008) - 0.9984840203084843).abs() < 1e-6);
        assert!((binomial_p_value(49_990_223, 100_000_008) - 0.05045338383852594).abs() < 1e-6);
    }

    #[test]
    fn count_check_examples() {
        let cfg = GameConfig::exact(0);
        assert!(step3_count_check(&labeled([0, 0, 0, 0], 40), &cfg).passed);
        assert!(!step3_count_check(&labeled([10, 0, 0, 10], 0), &cfg).passed);
        // k = 1/2, q = 1/4 over 16 boxes
        assert!(step3_count_check(&labeled([2, 6, 2, 6], 0), &cfg).passed);
    }

    #[test]
    fn device_checks() {
        let cfg = GameConfig::exact(0);
        let mut exec = Execution::new(Mode::Exact, 0);
        let pool = Pool::uniform(product_box(rat(1, 10), rat(1, 3)).unwrap(), Label::Unverified, rat(24, 1), &mut exec);
        let (rec, mixed) = step1_verify_devices(pool.clone(), &Devices::classical(), &cfg, &mut exec);
        assert!(rec.passed);
        assert_eq!(mixed.unwrap().total(), rat(12, 1));

        let rigged = Devices::new(crate::protocol::ProjectiveMeter, RiggedMixer);
        assert!(!step1_verify_devices(pool.clone(), &rigged, &cfg, &mut exec).0.passed);

        let forgetful = Devices::new(ForgetfulMeter, ClassicalMixer);
        assert!(!step1_verify_devices(pool.clone(), &forgetful, &cfg, &mut exec).0.passed);

        let cfg = GameConfig::sampled(0);
        let mut exec = Execution::new(Mode::Sampled, 9);
        // 20 all-h outcomes give a two-sided p-value of 2^-19, just above 1e-6.
        let pool = Pool::uniform(B::basis(Joint::HT), Label::Unverified, rat(44, 1), &mut exec);
        assert!(!step1_verify_devices(pool, &rigged, &cfg, &mut exec).0.passed);
    }

    #[test]
    fn decode_examples() {
        let d = Domino::new("121", "34").unwrap();
        let mut exec = Execution::new(Mode::Exact, 0);
        let honest = Pool::uniform(product_box(rat(121, 1000), rat(34, 100)).unwrap(), Label::Mixed, rat(1, 1), &mut exec);
        let (_, out) = step5_decode(honest, Instruction::for_domino(&d), 3, &Devices::classical(), &mut exec);
        assert_eq!(out.unwrap(), d);

        let correlated = Pool::uniform(B::new(rat(1, 2), rat(0, 1), rat(0, 1)).unwrap(), Label::Mixed, rat(1, 1), &mut exec);
        let (rec, out) = step5_decode(correlated, Instruction::for_domino(&d), 3, &Devices::classical(), &mut exec);
        assert!(out.is_err());
        assert_eq!(rec.second_h_frequency, "1");
    }

    #[test]
    fn adjudication_examples() {
        let budget = SearchBudget::new(1000, 20);
        let decoded = PcpInstance::from_pairs(&[("121", "121")]).unwrap();
        let a1 = Arrangement::order(vec![1]).unwrap();
        assert_eq!(adjudicate(&a1, &decoded, budget).unwrap().verdict, Verdict::Win);
        let decoded = PcpInstance::from_pairs(&[("121", "34")]).unwrap();
        let adj = adjudicate(&a1, &decoded, budget).unwrap();
        assert_eq!(adj.failure_site, Some(FailureSite::Step5Mismatch));
        let decoded = PcpInstance::from_pairs(&[("1", "11")]).unwrap();
        assert_eq!(adjudicate(&Arrangement::NoMatch, &decoded, budget).unwrap().verdict, Verdict::Win);
    }
}
