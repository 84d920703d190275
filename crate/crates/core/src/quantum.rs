//! Qubit coins and two-qubit boxes in the computational (σz) basis.
//!
//! Basis order is hh, ht, th, tt with the left compartment as the first factor.

use std::fmt;

use num_complex::Complex;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pcp::StringProbability;
use crate::physics::{BoxPhysics, Joint, Outcome, PhysicsKind, Side};
use crate::scalar::{Probability, Real};

fn norm_sqr_sum<T: Real>(amps: &[Complex<T>]) -> T {
    amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
}

fn check_norm<T: Real>(amps: &[Complex<T>]) -> Result<()> {
    let n = norm_sqr_sum(amps);
    if !Probability::is_close(&n, &T::one()) {
        return Err(Error::InvalidParams(format!("state norm² is {n}, expected 1")));
    }
    Ok(())
}

/// `amp_h|h⟩ + amp_t|t⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState<T> {
    pub amp_h: Complex<T>,
    pub amp_t: Complex<T>,
}

impl<T: Real> QubitState<T> {
    pub fn new(amp_h: Complex<T>, amp_t: Complex<T>) -> Result<Self> {
        check_norm(&[amp_h, amp_t])?;
        Ok(Self { amp_h, amp_t })
    }

    /// `√p|h⟩ + e^{iζ}√(1 − p)|t⟩`.
    pub fn from_probability(p: T, zeta: T) -> Result<Self> {
        if p < T::zero() || p > T::one() {
            return Err(Error::InvalidParams(format!("qubit probability {p} outside [0, 1]")));
        }
        Ok(Self {
            amp_h: Complex::new(p.sqrt(), T::zero()),
            amp_t: Complex::from_polar((T::one() - p).sqrt(), zeta),
        })
    }

    pub fn zero() -> Self {
        Self { amp_h: Complex::new(T::one(), T::zero()), amp_t: Complex::new(T::zero(), T::zero()) }
    }

    pub fn one() -> Self {
        Self { amp_h: Complex::new(T::zero(), T::zero()), amp_t: Complex::new(T::one(), T::zero()) }
    }

    pub fn prob_h(&self) -> T {
        self.amp_h.norm_sqr() / (self.amp_h.norm_sqr() + self.amp_t.norm_sqr())
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr_sum(&[self.amp_h, self.amp_t])
    }
}

/// `w|hh⟩ + x|ht⟩ + y|th⟩ + z|tt⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumBox<T> {
    amps: [Complex<T>; 4],
}

impl<T: Real> QuantumBox<T> {
    pub fn new(amps: [Complex<T>; 4]) -> Result<Self> {
        check_norm(&amps)?;
        Ok(Self { amps })
    }

    pub fn from_real(amps: [T; 4]) -> Result<Self> {
        Self::new(amps.map(|a| Complex::new(a, T::zero())))
    }

    pub fn basis(outcome: Joint) -> Self {
        let mut amps = [Complex::new(T::zero(), T::zero()); 4];
        amps[outcome.index()] = Complex::new(T::one(), T::zero());
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex<T>; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr_sum(&self.amps)
    }

    fn indices(side: Side, outcome: Outcome) -> [usize; 2] {
        let mut out = [0; 2];
        let mut n = 0;
        for j in Joint::ALL {
            if j.on(side) == outcome {
                out[n] = j.index();
                n += 1;
            }
        }
        out
    }

    /// Projection onto `outcome` on `side`, renormalised.
    pub fn project(&self, side: Side, outcome: Outcome) -> Option<Self> {
        let keep = Self::indices(side, outcome);
        let mass = keep.iter().fold(T::zero(), |acc, &i| acc + self.amps[i].norm_sqr());
        if mass <= T::zero() {
            return None;
        }
        let scale = mass.sqrt();
        let mut amps = [Complex::new(T::zero(), T::zero()); 4];
        for i in keep {
            amps[i] = self.amps[i] / scale;
        }
        Some(Self { amps })
    }
}

impl<T: Real> fmt::Display for QuantumBox<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.amps.iter().map(|a| format!("{}{:+}i", a.re, a.im)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl<T: Real> Serialize for QuantumBox<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<[String; 2]> = self.amps.iter().map(|a| [a.re.to_string(), a.im.to_string()]).collect();
        parts.serialize(s)
    }
}

/// The mixing device `M[χ] = (1/√2)[[1, −e^{−iχ}], [e^{iχ}, 1]]`.
///
/// Sends `|h⟩` to `(|h⟩ + e^{iχ}|t⟩)/√2` and `|t⟩` to `(−e^{−iχ}|h⟩ + |t⟩)/√2`,
/// so both outcomes are equally likely after mixing a basis state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingUnitary<T> {
    chi: T,
}

impl<T: Real> MixingUnitary<T> {
    pub fn new(chi: T) -> Result<Self> {
        if !(chi >= T::zero() && chi <= T::PI() + T::PI()) {
            return Err(Error::InvalidParams(format!("chi = {chi} outside [0, 2π]")));
        }
        Ok(Self { chi })
    }

    /// The χ = 0 member used by the protocol.
    pub fn standard() -> Self {
        Self { chi: T::zero() }
    }

    pub fn chi(&self) -> T {
        self.chi
    }

    pub fn matrix(&self) -> [[Complex<T>; 2]; 2] {
        let r = T::FRAC_1_SQRT_2();
        let phase = Complex::from_polar(T::one(), self.chi);
        let one = Complex::new(r, T::zero());
        [[one, -phase.conj() * r], [phase * r, one]]
    }

    /// Largest entry-wise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let m = self.matrix();
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                let entry = m[0][i].conj() * m[0][j] + m[1][i].conj() * m[1][j];
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((entry - Complex::new(target, T::zero())).norm());
            }
        }
        worst
    }
}

pub fn apply_mixing<T: Real>(u: &MixingUnitary<T>, q: &QubitState<T>) -> QubitState<T> {
    let m = u.matrix();
    QubitState {
        amp_h: m[0][0] * q.amp_h + m[0][1] * q.amp_t,
        amp_t: m[1][0] * q.amp_h + m[1][1] * q.amp_t,
    }
}

/// Apply `U ⊗ U` to a box.
pub fn apply_mix_both<T: Real>(u: &MixingUnitary<T>, b: &QuantumBox<T>) -> QuantumBox<T> {
    let m = u.matrix();
    let mut out = [Complex::new(T::zero(), T::zero()); 4];
    for (row, slot) in out.iter_mut().enumerate() {
        let (a, c) = (row >> 1, row & 1);
        for (col, amp) in b.amps.iter().enumerate() {
            let (bb, d) = (col >> 1, col & 1);
            *slot = *slot + m[a][bb] * m[c][d] * amp;
        }
    }
    QuantumBox { amps: out }
}

/// Born rule probabilities for hh, ht, th, tt.
pub fn outcome_distribution<T: Real>(b: &QuantumBox<T>) -> [T; 4] {
    b.amps.map(|a| a.norm_sqr())
}

/// Measure one compartment in the σz basis and collapse.
pub fn measure_compartment<T: Real, R: Rng + ?Sized>(
    b: &QuantumBox<T>,
    side: Side,
    rng: &mut R,
) -> (Outcome, QuantumBox<T>) {
    let p_h = b.prob_h(side);
    let outcome = if rng.random::<f64>() < p_h.approx_f64() { Outcome::H } else { Outcome::T };
    (outcome, b.project(side, outcome).expect("sampled branch has positive probability"))
}

/// Moduli `(|a|, |b|, |c|, |d|)` of the box that passes the marginal checks with
/// `(k1, q1)` while its conditional h-probability equals the first-decoded value.
pub fn cheat_moduli<T: Real>(k1: T, q1: T) -> [T; 4] {
    let l = if k1 <= q1 { k1 } else { q1 };
    let l2 = l * l;
    [l, (k1 - l2).sqrt(), (q1 - l2).sqrt(), (T::one() - k1 - q1 + l2).sqrt()]
}

/// The cheat state with all phases zero.
pub fn cheat_state<T: Real>(k1: &StringProbability, q1: &StringProbability) -> QuantumBox<T> {
    cheat_state_with_phases(k1, q1, [T::zero(); 4])
}

/// The cheat state with arbitrary per-amplitude phases; every choice works.
pub fn cheat_state_with_phases<T: Real>(
    k1: &StringProbability,
    q1: &StringProbability,
    phases: [T; 4],
) -> QuantumBox<T> {
    let moduli = cheat_moduli::<T>(k1.as_scalar(), q1.as_scalar());
    let mut amps = [Complex::new(T::zero(), T::zero()); 4];
    for i in 0..4 {
        amps[i] = Complex::from_polar(moduli[i], phases[i]);
    }
    QuantumBox { amps }
}

/// The state that `M[0] ⊗ M[0]` maps onto `phi`:
/// `½(a+b+c+d, −a+b−c+d, −a−b+c+d, a−b−c+d)`.
pub fn premix_state<T: Real>(phi: &QuantumBox<T>) -> QuantumBox<T> {
    let [a, b, c, d] = phi.amps;
    let half = T::one() / (T::one() + T::one());
    QuantumBox { amps: [(a + b + c + d) * half, (-a + b - c + d) * half, (-a - b + c + d) * half, (a - b - c + d) * half] }
}

impl<T: Real> BoxPhysics for QuantumBox<T> {
    type Prob = T;

    fn prob_h(&self, side: Side) -> T {
        let keep = Self::indices(side, Outcome::H);
        let mass = keep.iter().fold(T::zero(), |acc, &i| acc + self.amps[i].norm_sqr());
        mass / self.norm_sqr()
    }

    fn condition(&self, side: Side, outcome: Outcome) -> Option<Self> {
        self.project(side, outcome)
    }

    fn joint_distribution(&self) -> [T; 4] {
        outcome_distribution(self)
    }

    fn describe(&self) -> String {
        self.to_string()
    }

    fn kind() -> PhysicsKind {
        PhysicsKind::Quantum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcp::string_to_probability;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Q = QuantumBox<f64>;
    const TOL: f64 = 1e-12;

    fn close(a: Complex<f64>, b: Complex<f64>) -> bool {
        (a - b).norm() <= TOL
    }

    fn random_box(rng: &mut ChaCha8Rng) -> Q {
        let raw: [Complex<f64>; 4] =
            std::array::from_fn(|_| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let n = norm_sqr_sum(&raw).sqrt();
        Q::new(raw.map(|a| a / n)).unwrap()
    }

    #[test]
    fn mixing_single_qubits() {
        let u = MixingUnitary::<f64>::standard();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let zero = apply_mixing(&u, &QubitState::zero());
        assert!(close(zero.amp_h, Complex::new(s, 0.0)) && close(zero.amp_t, Complex::new(s, 0.0)));
        let one = apply_mixing(&u, &QubitState::one());
        assert!(close(one.amp_h, Complex::new(-s, 0.0)) && close(one.amp_t, Complex::new(s, 0.0)));

        let u = MixingUnitary::new(std::f64::consts::FRAC_PI_3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = QubitState::from_probability(rng.random::<f64>(), rng.random::<f64>() * 6.0).unwrap();
            assert!((apply_mixing(&u, &q).norm_sqr() - 1.0).abs() <= TOL);
        }
    }

    #[test]
    fn rejects_bad_states() {
        assert!(QubitState::new(Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)).is_err());
        assert!(Q::from_real([1.0, 1.0, 0.0, 0.0]).is_err());
        assert!(MixingUnitary::new(7.0).is_err());
    }

    #[test]
    fn tt_maps_to_alternating_superposition() {
        let mixed = apply_mix_both(&MixingUnitary::standard(), &Q::basis(Joint::TT));
        // w = x = y = 0, z = 1 in (w−x−y+z, w+x−y−z, w−x+y−z, w+x+y+z)/2
        let expect = [0.5, -0.5, -0.5, 0.5];
        for (a, e) in mixed.amplitudes().iter().zip(expect) {
            assert!(close(*a, Complex::new(e, 0.0)));
        }
    }

    #[test]
    fn premix_of_hh() {
        let psi = premix_state(&Q::basis(Joint::HH));
        for (a, e) in psi.amplitudes().iter().zip([0.5, -0.5, -0.5, 0.5]) {
            assert!(close(*a, Complex::new(e, 0.0)));
        }
    }

    #[test]
    fn premix_matches_adjoint_of_mixing() {
        // independent route: apply (U ⊗ U)† built from the conjugate transpose
        let m = MixingUnitary::<f64>::standard().matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let phi = random_box(&mut rng);
            let mut adj = [Complex::new(0.0, 0.0); 4];
            for (row, slot) in adj.iter_mut().enumerate() {
                for (col, amp) in phi.amplitudes().iter().enumerate() {
                    let coeff = (m[col >> 1][row >> 1] * m[col & 1][row & 1]).conj();
                    *slot += coeff * amp;
                }
            }
            let psi = premix_state(&phi);
            for (a, b) in psi.amplitudes().iter().zip(adj) {
                assert!(close(*a, b));
            }
        }
    }

    #[test]
    fn born_rule() {
        let b = Q::from_real([0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(outcome_distribution(&b), [0.25; 4]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p: f64 = outcome_distribution(&random_box(&mut rng)).iter().sum();
            assert!((p - 1.0).abs() <= TOL);
        }
    }

    #[test]
    fn measurement_projects() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi = Q::from_real([0.5, 0.5, 0.5, 0.5]).unwrap();
        loop {
            let (o, post) = measure_compartment(&phi, Side::Left, &mut rng);
            if o == Outcome::H {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for (a, e) in post.amplitudes().iter().zip([s, s, 0.0, 0.0]) {
                    assert!(close(*a, Complex::new(e, 0.0)));
                }
                let (again, _) = measure_compartment(&post, Side::Left, &mut rng);
                assert_eq!(again, Outcome::H);
                break;
            }
        }
    }

    #[test]
    fn cheat_state_example() {
        let k = string_to_probability("121").unwrap();
        let q = string_to_probability("34").unwrap();
        let phi: Q = cheat_state(&k, &q);
        let m: Vec<f64> = phi.amplitudes().iter().map(|a| a.norm()).collect();
        let expect = [0.121, 0.106359f64.sqrt(), 0.325359f64.sqrt(), 0.553641f64.sqrt()];
        for (a, e) in m.iter().zip(expect) {
            assert!((a - e).abs() <= TOL, "{a} vs {e}");
        }
        assert!((expect.iter().map(|e| e * e).sum::<f64>() - 1.0).abs() <= TOL);
        assert!((phi.prob_h(Side::Left) - 0.121).abs() <= TOL);
        assert!((phi.prob_h(Side::Right) - 0.34).abs() <= TOL);
        let post = phi.project(Side::Left, Outcome::H).unwrap();
        let dist = outcome_distribution(&post);
        assert!((dist[0] - 0.121).abs() <= TOL);
    }

    #[test]
    fn symmetric_cheat_state() {
        let p = string_to_probability("3").unwrap();
        let m = cheat_moduli::<f64>(p.as_scalar(), p.as_scalar());
        assert!((m[1] - (0.3f64 - 0.09).sqrt()).abs() <= TOL);
        assert!((m[2] - m[1]).abs() <= TOL);
    }

    #[test]
    fn random_phases_still_pass() {
        let k = string_to_probability("42").unwrap();
        let q = string_to_probability("13").unwrap();
        let phi: Q = cheat_state_with_phases(&k, &q, [0.3, 1.7, 4.0, 2.2]);
        assert!((phi.prob_h(Side::Left) - 0.42).abs() <= TOL);
        assert!((phi.prob_h(Side::Right) - 0.13).abs() <= TOL);
        // k > q: the right side is decoded first
        let post = phi.project(Side::Right, Outcome::H).unwrap();
        assert!((post.prob_h(Side::Left) - 0.13).abs() <= TOL);
    }

    #[test]
    fn works_in_single_precision() {
        let k = string_to_probability("2").unwrap();
        let q = string_to_probability("31").unwrap();
        let phi: QuantumBox<f32> = cheat_state(&k, &q);
        let back = apply_mix_both(&MixingUnitary::standard(), &premix_state(&phi));
        assert!((back.prob_h(Side::Left) - 0.2).abs() < 1e-5);
    }

    proptest::proptest! {
        #[test]
        fn mixing_basis_qubits_is_fair_for_every_chi(chi in 0.0f64..=std::f64::consts::TAU) {
            let u = MixingUnitary::new(chi).unwrap();
            proptest::prop_assert!(u.unitarity_defect() <= TOL);
            for q in [QubitState::zero(), QubitState::one()] {
                proptest::prop_assert!((apply_mixing(&u, &q).prob_h() - 0.5).abs() <= TOL);
            }
        }
    }
}
