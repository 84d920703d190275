//! Player behaviors: honest classical play, a correlated classical cheat and
//! the quantum interference cheat.

use std::fmt::Debug;

use num_traits::{ToPrimitive, Zero};

use crate::classical::{product_box, ClassicalBox};
use crate::error::{Error, Result};
use crate::pcp::{find_match, Arrangement, Domino, MatchSearch, PcpInstance, SearchBudget};
use crate::physics::{Joint, Side};
use crate::protocol::{
    AnyDevices, AnyPool, ClassicalPhysics, Devices, Execution, Label, Mode, Pool, ProjectiveMeter, QuantumPhysics,
};
use crate::quantum::{cheat_state, cheat_state_with_phases, premix_state, MixingUnitary};
use crate::scalar::{Probability, Rational};

pub trait PlayerStrategy: Debug + Send + Sync {
    fn name(&self) -> &str;

    /// The arrangement sent to the referee.
    fn claim(&self, instance: &PcpInstance) -> Arrangement;

    /// Measurement and mixing devices for domino `index` (1-based).
    fn provide_devices(&self, index: usize) -> AnyDevices;

    /// `n` unverified boxes for domino `index`.
    fn provide_boxes(&self, domino: &Domino, index: usize, n: u64, exec: &mut Execution) -> AnyPool;

    /// Select and label a quarter of the mixed pool.
    fn encode(&self, mixed: AnyPool, domino: &Domino, index: usize, exec: &mut Execution) -> AnyPool;
}

/// Names accepted by [`strategy_by_name`].
pub const STRATEGY_NAMES: [&str; 3] = ["classical-honest", "classical-cheat", "quantum-cheat"];

pub fn strategy_by_name(name: &str, solver: SearchBudget) -> Result<Box<dyn PlayerStrategy>> {
    match name {
        "classical-honest" => Ok(Box::new(ClassicalHonest::new(solver))),
        "classical-cheat" => Ok(Box::new(ClassicalCheat)),
        "quantum-cheat" => Ok(Box::new(QuantumCheat::default())),
        other => Err(Error::UnknownStrategy(other.to_string())),
    }
}

/// Product distribution of a domino's `(k, q)` in the order hh, ht, th, tt.
pub fn product_distribution(domino: &Domino) -> [Rational; 4] {
    let k = domino.k().value().clone();
    let q = domino.q().value().clone();
    let one = Rational::from_count(1);
    [
        k.clone() * q.clone(),
        k.clone() * (one.clone() - q.clone()),
        (one.clone() - k.clone()) * q.clone(),
        (one.clone() - k) * (one - q),
    ]
}

/// Correlated distribution whose left marginal is `k`, right marginal is `q` and
/// whose conditional on the first-decoded side repeats the first value.
pub fn correlated_cheat_distribution(domino: &Domino) -> [Rational; 4] {
    let k = domino.k().value().clone();
    let q = domino.q().value().clone();
    let l = if k <= q { k.clone() } else { q.clone() };
    let l2 = l.clone() * l;
    let one = Rational::from_count(1);
    [l2.clone(), k.clone() - l2.clone(), q.clone() - l2.clone(), one - k - q + l2]
}

/// Splits `total` into four integers proportional to `weights` by the largest
/// remainder method; ties go to the earlier outcome in hh, ht, th, tt order.
pub fn apportion(total: u64, weights: &[Rational; 4]) -> [u64; 4] {
    let sum = weights.iter().fold(Rational::zero(), |a, w| a + w.clone());
    let quotas: Vec<Rational> = weights.iter().map(|w| w.clone() * Rational::from_count(total) / sum.clone()).collect();
    let mut out = [0u64; 4];
    let mut rems = Vec::with_capacity(4);
    for (i, q) in quotas.iter().enumerate() {
        let fl = q.floor().to_integer().to_u64().expect("quota fits in u64");
        out[i] = fl;
        rems.push((q.clone() - Rational::from_count(fl), i));
    }
    let mut left = total - out.iter().sum::<u64>();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in rems {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Measure both compartments of every box and label it with the joint outcome.
pub fn measure_and_relabel(pool: Pool<ClassicalPhysics>, exec: &mut Execution) -> [Pool<ClassicalPhysics>; 4] {
    let by_left = pool.measure(Side::Left, &ProjectiveMeter, exec);
    let mut out: [Pool<ClassicalPhysics>; 4] = Default::default();
    for (left, part) in [(crate::physics::Outcome::H, by_left.heads), (crate::physics::Outcome::T, by_left.tails)] {
        let by_right = part.measure(Side::Right, &ProjectiveMeter, exec);
        for (right, sub) in [(crate::physics::Outcome::H, by_right.heads), (crate::physics::Outcome::T, by_right.tails)] {
            let joint = Joint::new(left, right);
            if let Some(p) = sub.relabel(Label::Outcome(joint)) {
                out[joint.index()].extend(p);
            }
        }
    }
    out
}

/// Picks a quarter of the mixed pool with label proportions `target`.
pub fn select_labels(
    mixed: Pool<ClassicalPhysics>,
    target: &[Rational; 4],
    exec: &mut Execution,
) -> Pool<ClassicalPhysics> {
    let quarter = exec.fraction(&mixed.total(), 1, 4);
    let mut by_label = measure_and_relabel(mixed, exec);
    let amounts: [Rational; 4] = match exec.mode() {
        Mode::Exact => target.clone().map(|p| quarter.clone() * p),
        Mode::Sampled => apportion(quarter.to_count(), target).map(Rational::from_count),
    };
    let mut encoded = Pool::new();
    for (pool, amount) in by_label.iter_mut().zip(amounts) {
        let available = pool.total();
        let take = if amount > available { available } else { amount };
        encoded.extend(pool.take(&take, exec));
    }
    encoded
}

fn classical_boxes(domino: &Domino, n: u64, exec: &mut Execution) -> AnyPool {
    let state: ClassicalBox<Rational> =
        product_box(domino.k().value().clone(), domino.q().value().clone()).expect("string probabilities lie in (0, 1)");
    AnyPool::Classical(Pool::uniform(state, Label::Unverified, Rational::from_count(n), exec))
}

fn honest_encode(mixed: AnyPool, domino: &Domino, exec: &mut Execution) -> AnyPool {
    match mixed {
        AnyPool::Classical(p) => AnyPool::Classical(select_labels(p, &product_distribution(domino), exec)),
        other => other,
    }
}

/// Encodes every domino truthfully and claims whatever its bounded solver finds.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalHonest {
    pub solver: SearchBudget,
}

impl ClassicalHonest {
    pub fn new(solver: SearchBudget) -> Self {
        Self { solver }
    }
}

impl PlayerStrategy for ClassicalHonest {
    fn name(&self) -> &str {
        "classical-honest"
    }

    fn claim(&self, instance: &PcpInstance) -> Arrangement {
        match find_match(instance, self.solver) {
            MatchSearch::Found(arr) => arr,
            MatchSearch::NoneWithinBudget => Arrangement::NoMatch,
        }
    }

    fn provide_devices(&self, _index: usize) -> AnyDevices {
        AnyDevices::Classical(Devices::classical())
    }

    fn provide_boxes(&self, domino: &Domino, _index: usize, n: u64, exec: &mut Execution) -> AnyPool {
        classical_boxes(domino, n, exec)
    }

    fn encode(&self, mixed: AnyPool, domino: &Domino, _index: usize, exec: &mut Execution) -> AnyPool {
        honest_encode(mixed, domino, exec)
    }
}

/// Claims `A1` and labels domino A1's boxes with a correlated distribution that
/// would decode as `(s, s)`. An illustrative adversary, not an optimal one.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalCheat;

impl PlayerStrategy for ClassicalCheat {
    fn name(&self) -> &str {
        "classical-cheat"
    }

    fn claim(&self, _instance: &PcpInstance) -> Arrangement {
        Arrangement::Order(vec![1])
    }

    fn provide_devices(&self, _index: usize) -> AnyDevices {
        AnyDevices::Classical(Devices::classical())
    }

    fn provide_boxes(&self, domino: &Domino, _index: usize, n: u64, exec: &mut Execution) -> AnyPool {
        classical_boxes(domino, n, exec)
    }

    fn encode(&self, mixed: AnyPool, domino: &Domino, index: usize, exec: &mut Execution) -> AnyPool {
        match (index, mixed) {
            (1, AnyPool::Classical(p)) => {
                AnyPool::Classical(select_labels(p, &correlated_cheat_distribution(domino), exec))
            }
            (_, other) => honest_encode(other, domino, exec),
        }
    }
}

/// Claims `A1` and prepares A1's boxes so that the mixing unitary turns them
/// into the cheat state; the other dominoes are encoded honestly.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuantumCheat {
    /// Amplitude phases of the cheat state; all zero when `None`.
    pub phases: Option<[f64; 4]>,
}

impl QuantumCheat {
    pub fn with_phases(phases: [f64; 4]) -> Self {
        Self { phases: Some(phases) }
    }
}

impl PlayerStrategy for QuantumCheat {
    fn name(&self) -> &str {
        "quantum-cheat"
    }

    fn claim(&self, _instance: &PcpInstance) -> Arrangement {
        Arrangement::Order(vec![1])
    }

    fn provide_devices(&self, index: usize) -> AnyDevices {
        if index == 1 {
            AnyDevices::Quantum(Devices::quantum(MixingUnitary::standard()))
        } else {
            AnyDevices::Classical(Devices::classical())
        }
    }

    fn provide_boxes(&self, domino: &Domino, index: usize, n: u64, exec: &mut Execution) -> AnyPool {
        if index != 1 {
            return classical_boxes(domino, n, exec);
        }
        let (k, q) = (domino.k(), domino.q());
        let phi: QuantumPhysics = match self.phases {
            Some(ph) => cheat_state_with_phases(&k, &q, ph),
            None => cheat_state(&k, &q),
        };
        AnyPool::Quantum(Pool::uniform(premix_state(&phi), Label::Unverified, f64::from_count(n), exec))
    }

    fn encode(&self, mixed: AnyPool, domino: &Domino, _index: usize, exec: &mut Execution) -> AnyPool {
        match mixed {
            AnyPool::Quantum(mut p) => AnyPool::Quantum(p.take_fraction(1, 4, exec)),
            other => honest_encode(other, domino, exec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::is_uncorrelated;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn apportion_sums_and_breaks_ties_in_order() {
        let w = [rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)];
        assert_eq!(apportion(6, &w), [2, 2, 1, 1]);
        let d = Domino::new("121", "34").unwrap();
        let counts = apportion(1000, &product_distribution(&d));
        assert_eq!(counts.iter().sum::<u64>(), 1000);
        // 41.14, 79.86, 298.86, 580.14
        assert_eq!(counts, [41, 80, 299, 580]);
    }

    #[test]
    fn cheat_distribution_is_correlated_with_right_marginals() {
        let d = Domino::new("121", "34").unwrap();
        let p = correlated_cheat_distribution(&d);
        let b = ClassicalBox::from_distribution(p.clone()).unwrap();
        assert!(!is_uncorrelated(&b));
        assert_eq!(p[0].clone() + p[1].clone(), rat(121, 1000));
        assert_eq!(p[0].clone() + p[2].clone(), rat(34, 100));
        // conditional right-h given left h repeats k
        assert_eq!(p[0].clone() / (p[0].clone() + p[1].clone()), rat(121, 1000));
    }

    #[test]
    fn honest_selection_is_uncorrelated_in_exact_mode() {
        let d = Domino::new("3", "142").unwrap();
        let mut exec = Execution::new(Mode::Exact, 0);
        let mixed = Pool::uniform(ClassicalBox::uniform(), Label::Mixed, rat(12, 1), &mut exec);
        let enc = select_labels(mixed, &product_distribution(&d), &mut exec);
        assert_eq!(enc.total(), rat(3, 1));
        let counts = Joint::ALL.map(|j| enc.count_label(Label::Outcome(j)) / rat(3, 1));
        let b = ClassicalBox::from_distribution(counts).unwrap();
        assert!(is_uncorrelated(&b));
    }

    #[test]
    fn names_resolve() {
        for n in STRATEGY_NAMES {
            assert_eq!(strategy_by_name(n, SearchBudget::new(10, 10)).unwrap().name(), n);
        }
        assert!(strategy_by_name("oracle", SearchBudget::new(10, 10)).is_err());
    }
}
