//! Classical coins and boxes as probability vectors.
//!
//! A box `B[α, β, γ]` assigns probabilities α, β, γ and δ = 1 − α − β − γ to the
//! outcomes hh, ht, th and tt. The mixing device is the constant stochastic
//! matrix `½[[1, 1], [1, 1]]`, applied to both compartments of a box.

use std::fmt;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::physics::{BoxPhysics, Joint, Outcome, PhysicsKind, Side};
use crate::scalar::{parse_decimal, Probability};

fn in_unit_interval<T: Probability>(p: &T) -> bool {
    *p >= T::zero() && *p <= T::one()
}

/// Draw `h` with probability `p_h`. Floating point is used only here.
fn sample_outcome<T: Probability, R: Rng + ?Sized>(p_h: &T, rng: &mut R) -> Outcome {
    if rng.random::<f64>() < p_h.approx_f64() {
        Outcome::H
    } else {
        Outcome::T
    }
}

/// `C_p = p·C(h) + (1 − p)·C(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalCoin<T> {
    p_head: T,
}

impl<T: Probability> ClassicalCoin<T> {
    pub fn new(p_head: T) -> Result<Self> {
        if !in_unit_interval(&p_head) {
            return Err(Error::InvalidParams(format!("coin probability {p_head} outside [0, 1]")));
        }
        Ok(Self { p_head })
    }

    pub fn heads() -> Self {
        Self { p_head: T::one() }
    }

    pub fn tails() -> Self {
        Self { p_head: T::zero() }
    }

    pub fn fair() -> Self {
        Self { p_head: T::half() }
    }

    pub fn p_head(&self) -> &T {
        &self.p_head
    }

    fn vector(&self) -> [T; 2] {
        [self.p_head.clone(), T::one() - self.p_head.clone()]
    }
}

/// Measure a coin; the returned coin is collapsed onto the outcome.
pub fn measure_coin<T: Probability, R: Rng + ?Sized>(
    coin: &ClassicalCoin<T>,
    rng: &mut R,
) -> (Outcome, ClassicalCoin<T>) {
    match sample_outcome(&coin.p_head, rng) {
        Outcome::H => (Outcome::H, ClassicalCoin::heads()),
        Outcome::T => (Outcome::T, ClassicalCoin::tails()),
    }
}

fn mixing_matrix<T: Probability>() -> [[T; 2]; 2] {
    [[T::half(), T::half()], [T::half(), T::half()]]
}

/// Apply the classical mixing device; every input maps to `C_{1/2}`.
pub fn mix_coin<T: Probability>(coin: &ClassicalCoin<T>) -> ClassicalCoin<T> {
    let m = mixing_matrix::<T>();
    let v = coin.vector();
    ClassicalCoin { p_head: m[0][0].clone() * v[0].clone() + m[0][1].clone() * v[1].clone() }
}

/// Joint distribution of two classical coins held in the two compartments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalBox<T> {
    alpha: T,
    beta: T,
    gamma: T,
}

impl<T: Probability> ClassicalBox<T> {
    /// `B[α, β, γ]`; rejects components outside the probability simplex.
    pub fn new(alpha: T, beta: T, gamma: T) -> Result<Self> {
        let sum = alpha.clone() + beta.clone() + gamma.clone();
        if ![&alpha, &beta, &gamma, &sum].into_iter().all(in_unit_interval) {
            return Err(Error::InvalidParams(format!("B[{alpha}, {beta}, {gamma}] is not a distribution")));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Build from the four outcome probabilities hh, ht, th, tt.
    pub fn from_distribution(probs: [T; 4]) -> Result<Self> {
        let total = probs.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !total.is_close(&T::one()) {
            return Err(Error::InvalidParams(format!("distribution sums to {total}")));
        }
        let [a, b, c, _] = probs;
        Self::new(a, b, c)
    }

    pub fn basis(outcome: Joint) -> Self {
        let mut p = [T::zero(), T::zero(), T::zero(), T::zero()];
        p[outcome.index()] = T::one();
        let [a, b, c, _] = p;
        Self { alpha: a, beta: b, gamma: c }
    }

    pub fn uniform() -> Self {
        let q = T::ratio(1, 4);
        Self { alpha: q.clone(), beta: q.clone(), gamma: q }
    }

    pub fn alpha(&self) -> &T {
        &self.alpha
    }

    pub fn beta(&self) -> &T {
        &self.beta
    }

    pub fn gamma(&self) -> &T {
        &self.gamma
    }

    pub fn delta(&self) -> T {
        T::one() - self.alpha.clone() - self.beta.clone() - self.gamma.clone()
    }

    pub fn probabilities(&self) -> [T; 4] {
        [self.alpha.clone(), self.beta.clone(), self.gamma.clone(), self.delta()]
    }

    /// Marginal h-probability of a compartment: α + β on the left, α + γ on the right.
    pub fn marginal_h(&self, side: Side) -> T {
        match side {
            Side::Left => self.alpha.clone() + self.beta.clone(),
            Side::Right => self.alpha.clone() + self.gamma.clone(),
        }
    }

    /// Bayes restriction to `outcome` on `side`.
    pub fn conditional(&self, side: Side, outcome: Outcome) -> Option<Self> {
        let p = self.probabilities();
        let keep: Vec<Joint> = Joint::ALL.into_iter().filter(|j| j.on(side) == outcome).collect();
        let mass = keep.iter().fold(T::zero(), |acc, j| acc + p[j.index()].clone());
        if mass.is_zero_ish() {
            return None;
        }
        let mut out = [T::zero(), T::zero(), T::zero(), T::zero()];
        for j in keep {
            out[j.index()] = p[j.index()].clone() / mass.clone();
        }
        let [a, b, c, _] = out;
        Some(Self { alpha: a, beta: b, gamma: c })
    }
}

impl<T: Probability> fmt::Display for ClassicalBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B[{}, {}, {}]", self.alpha, self.beta, self.gamma)
    }
}

impl<T: Probability> Serialize for ClassicalBox<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p: Vec<String> = self.probabilities().iter().map(ToString::to_string).collect();
        p.serialize(s)
    }
}

impl<'de, T: Probability> Deserialize<'de> for ClassicalBox<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = <[String; 4]>::deserialize(d)?;
        let mut probs = [T::zero(), T::zero(), T::zero(), T::zero()];
        for (slot, text) in probs.iter_mut().zip(&raw) {
            // BigRational only parses `a/b`, integers go through the decimal reader
            *slot = T::from_str_radix(text, 10)
                .ok()
                .or_else(|| parse_decimal(text).map(|r| T::from_rational(&r)))
                .ok_or_else(|| D::Error::custom(format!("bad probability {text:?}")))?;
        }
        Self::from_distribution(probs).map_err(D::Error::custom)
    }
}

/// Apply the mixing device to both compartments (`M ⊗ M`); the result is uniform.
pub fn mix_box<T: Probability>(b: &ClassicalBox<T>) -> ClassicalBox<T> {
    let m = mixing_matrix::<T>();
    let p = b.probabilities();
    let mut out = [T::zero(), T::zero(), T::zero(), T::zero()];
    for target in Joint::ALL {
        for source in Joint::ALL {
            let row = |side| match target.on(side) {
                Outcome::H => 0,
                Outcome::T => 1,
            };
            let col = |side| match source.on(side) {
                Outcome::H => 0,
                Outcome::T => 1,
            };
            let weight = m[row(Side::Left)][col(Side::Left)].clone() * m[row(Side::Right)][col(Side::Right)].clone();
            out[target.index()] = out[target.index()].clone() + weight * p[source.index()].clone();
        }
    }
    let [a, b2, c, _] = out;
    ClassicalBox { alpha: a, beta: b2, gamma: c }
}

/// Measure one compartment, returning the outcome and the conditioned box.
pub fn measure_box_compartment<T: Probability, R: Rng + ?Sized>(
    b: &ClassicalBox<T>,
    side: Side,
    rng: &mut R,
) -> (Outcome, ClassicalBox<T>) {
    let outcome = sample_outcome(&b.marginal_h(side), rng);
    let conditioned = b.conditional(side, outcome).expect("sampled branch has positive probability");
    (outcome, conditioned)
}

/// Separable box `C_p ⊗ C_q`: `B[pq, p(1 − q), (1 − p)q]`.
pub fn product_box<T: Probability>(p: T, q: T) -> Result<ClassicalBox<T>> {
    if !in_unit_interval(&p) || !in_unit_interval(&q) {
        return Err(Error::InvalidParams(format!("marginals ({p}, {q}) outside [0, 1]")));
    }
    let one = T::one();
    Ok(ClassicalBox {
        alpha: p.clone() * q.clone(),
        beta: p.clone() * (one.clone() - q.clone()),
        gamma: (one - p) * q,
    })
}

/// The compartments are independent iff `α·δ = β·γ`.
pub fn is_uncorrelated<T: Probability>(b: &ClassicalBox<T>) -> bool {
    (b.alpha.clone() * b.delta()).is_close(&(b.beta.clone() * b.gamma.clone()))
}

impl<T: Probability> BoxPhysics for ClassicalBox<T> {
    type Prob = T;

    fn prob_h(&self, side: Side) -> T {
        self.marginal_h(side)
    }

    fn condition(&self, side: Side, outcome: Outcome) -> Option<Self> {
        self.conditional(side, outcome)
    }

    fn joint_distribution(&self) -> [T; 4] {
        self.probabilities()
    }

    fn describe(&self) -> String {
        self.to_string()
    }

    fn kind() -> PhysicsKind {
        PhysicsKind::Classical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    type Exact = ClassicalBox<Rational>;

    #[test]
    fn coin_measurement_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (o, c) = measure_coin(&ClassicalCoin::<Rational>::heads(), &mut rng);
        assert_eq!(o, Outcome::H);
        assert_eq!(c, ClassicalCoin::heads());
        for _ in 0..100 {
            let (first, collapsed) = measure_coin(&ClassicalCoin::<Rational>::fair(), &mut rng);
            let (second, _) = measure_coin(&collapsed, &mut rng);
            assert_eq!(first, second);
        }
    }

    #[test]
    fn fair_coin_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20_000;
        let heads = (0..n)
            .filter(|_| measure_coin(&ClassicalCoin::<f64>::fair(), &mut rng).0 == Outcome::H)
            .count();
        assert!((heads as f64 / n as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn mixing_is_constant() {
        let fair = ClassicalCoin::<Rational>::fair();
        assert_eq!(mix_coin(&ClassicalCoin::heads()), fair);
        assert_eq!(mix_coin(&ClassicalCoin::tails()), fair);
        assert_eq!(mix_coin(&fair), fair);

        let uniform = Exact::uniform();
        assert_eq!(mix_box(&Exact::basis(Joint::HH)), uniform);
        assert_eq!(mix_box(&uniform), uniform);
        assert_eq!(mix_box(&product_box(rat(121, 1000), rat(34, 100)).unwrap()), uniform);
    }

    #[test]
    fn product_boxes() {
        assert_eq!(product_box(rat(1, 1), rat(0, 1)).unwrap(), Exact::basis(Joint::HT));
        let b = product_box(rat(121, 1000), rat(34, 100)).unwrap();
        assert_eq!(b.alpha(), &rat(4114, 100_000));
        assert_eq!(b.marginal_h(Side::Left), rat(121, 1000));
        assert_eq!(b.marginal_h(Side::Right), rat(34, 100));
        assert_eq!(product_box(rat(1, 2), rat(1, 2)).unwrap(), Exact::uniform());
        assert!(product_box(rat(3, 2), rat(1, 2)).is_err());
    }

    #[test]
    fn correlation_criterion() {
        assert!(is_uncorrelated(&product_box(rat(121, 1000), rat(34, 100)).unwrap()));
        assert!(!is_uncorrelated(&Exact::new(rat(1, 2), rat(0, 1), rat(0, 1)).unwrap()));
        assert!(is_uncorrelated(&Exact::uniform()));
    }

    #[test]
    fn conditioning() {
        // B[1/2, 0, 0]: conditional right-h given left-h, by enumerating the joint table
        let b = Exact::new(rat(1, 2), rat(0, 1), rat(0, 1)).unwrap();
        let table = b.probabilities();
        let left_h = table[0].clone() + table[1].clone();
        let oracle = table[0].clone() / left_h;
        let cond = b.conditional(Side::Left, Outcome::H).unwrap();
        assert_eq!(cond.marginal_h(Side::Right), oracle);
        assert_eq!(oracle, rat(1, 1));

        let p = product_box(rat(3, 10), rat(2, 5)).unwrap();
        let cond = p.conditional(Side::Left, Outcome::H).unwrap();
        assert_eq!(cond.marginal_h(Side::Right), rat(2, 5));
        assert_eq!(Exact::uniform().marginal_h(Side::Left), rat(1, 2));
        assert!(Exact::basis(Joint::HH).conditional(Side::Left, Outcome::T).is_none());
    }

    #[test]
    fn rejects_invalid_boxes() {
        assert!(Exact::new(rat(1, 2), rat(1, 2), rat(1, 2)).is_err());
        assert!(Exact::new(rat(-1, 2), rat(1, 2), rat(0, 1)).is_err());
        assert!(ClassicalCoin::new(rat(2, 1)).is_err());
    }

    #[test]
    fn sampled_marginals_converge() {
        let b = Exact::new(rat(1, 10), rat(3, 10), rat(1, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
        let n = 100_000;
        for side in [Side::Left, Side::Right] {
            let h = (0..n).filter(|_| measure_box_compartment(&b, side, &mut rng).0 == Outcome::H).count();
            let exact = b.marginal_h(side).approx_f64();
            assert!((h as f64 / n as f64 - exact).abs() < 0.01, "{side}: {h}");
        }
    }

    fn grid_rational() -> impl Strategy<Value = Rational> {
        (0i64..=20).prop_map(|n| rat(n, 20))
    }

    /// `(a, b, c)` with `a + b + c ≤ n`.
    fn simplex(n: i64) -> impl Strategy<Value = (i64, i64, i64)> {
        (0..=n).prop_flat_map(move |a| (Just(a), 0..=n - a)).prop_flat_map(move |(a, b)| (Just(a), Just(b), 0..=n - a - b))
    }

    proptest! {
        #[test]
        fn product_boxes_are_uncorrelated_and_condition_invariant(p in grid_rational(), q in grid_rational()) {
            let b = product_box(p.clone(), q.clone()).unwrap();
            prop_assert!(is_uncorrelated(&b));
            for side in [Side::Left, Side::Right] {
                for o in [Outcome::H, Outcome::T] {
                    if let Some(c) = b.conditional(side, o) {
                        prop_assert_eq!(c.marginal_h(side.other()), b.marginal_h(side.other()));
                    }
                }
            }
        }

        #[test]
        fn diagonal_correlated_boxes_are_detected(n in 1i64..20) {
            let b = Exact::new(rat(n, 20), rat(0, 1), rat(0, 1)).unwrap();
            prop_assert!(!is_uncorrelated(&b));
        }

        #[test]
        fn serde_round_trip_keeps_marginals((a, b, c) in simplex(12)) {
            let boxed = Exact::new(rat(a, 12), rat(b, 12), rat(c, 12)).unwrap();
            let back: ClassicalBox<Rational> = serde_json::from_str(&serde_json::to_string(&boxed).unwrap()).unwrap();
            prop_assert_eq!(back.marginal_h(Side::Left), boxed.marginal_h(Side::Left));
            prop_assert_eq!(back.marginal_h(Side::Right), boxed.marginal_h(Side::Right));
            let approx = boxed.probabilities().map(|p| p.approx_f64());
            let float = ClassicalBox::from_distribution(approx).unwrap();
            let back: ClassicalBox<f64> = serde_json::from_str(&serde_json::to_string(&float).unwrap()).unwrap();
            prop_assert_eq!(back, float);
        }

        #[test]
        fn mixing_is_idempotent((a, b, c) in simplex(10)) {
            let bx = Exact::new(rat(a, 10), rat(b, 10), rat(c, 10)).unwrap();
            let once = mix_box(&bx);
            prop_assert_eq!(mix_box(&once), once.clone());
            prop_assert_eq!(once, Exact::uniform());
        }
    }
}
