//! Box pools and the execution context that moves them between agents.
//!
//! A pool is a list of [`LabeledBox`] entries, each standing for `count`
//! identically prepared boxes. In exact mode counts are weights and every
//! measurement splits a weight deterministically; in sampled mode counts are
//! integers and splits and random subsets are drawn from the binomial and
//! hypergeometric laws that govern box-by-box sampling.

use num_traits::Zero;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use serde::{Deserialize, Serialize, Serializer};

use super::devices::Meter;
use crate::physics::{BoxPhysics, Joint, Outcome, Side};
use crate::scalar::Probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Propagate distributions exactly with per-branch weights.
    #[default]
    Exact,
    /// Sample box counts.
    Sampled,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
        })
    }
}

/// Box label. Transitions only go `unverified → mixed → <outcome>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Unverified,
    Mixed,
    Outcome(Joint),
}

impl Label {
    pub fn can_become(self, next: Label) -> bool {
        matches!(
            (self, next),
            (Label::Unverified, Label::Mixed) | (Label::Mixed, Label::Outcome(_))
        ) || self == next
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Unverified => f.write_str("unverified"),
            Label::Mixed => f.write_str("mixed"),
            Label::Outcome(j) => j.fmt(f),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `count` boxes sharing one physical state and one label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBox<P: BoxPhysics> {
    pub id: u64,
    pub state: P,
    pub label: Label,
    pub count: P::Prob,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pool<P: BoxPhysics> {
    boxes: Vec<LabeledBox<P>>,
}

impl<P: BoxPhysics> Default for Pool<P> {
    fn default() -> Self {
        Self { boxes: Vec::new() }
    }
}

impl<P: BoxPhysics> Pool<P> {
    pub fn new() -> Self {
        Self::default()
    }

    /// `count` boxes all prepared in `state`.
    pub fn uniform(state: P, label: Label, count: P::Prob, exec: &mut Execution) -> Self {
        let mut pool = Self::new();
        pool.push(state, label, count, exec);
        pool
    }

    pub fn push(&mut self, state: P, label: Label, count: P::Prob, exec: &mut Execution) {
        if count > P::Prob::zero() && !count.is_zero_ish() {
            self.boxes.push(LabeledBox { id: exec.fresh_id(), state, label, count });
        }
    }

    fn push_entry(&mut self, entry: LabeledBox<P>) {
        if entry.count > P::Prob::zero() && !entry.count.is_zero_ish() {
            self.boxes.push(entry);
        }
    }

    pub fn boxes(&self) -> &[LabeledBox<P>] {
        &self.boxes
    }

    pub fn into_boxes(self) -> Vec<LabeledBox<P>> {
        self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn total(&self) -> P::Prob {
        self.boxes.iter().fold(P::Prob::zero(), |acc, b| acc + b.count.clone())
    }

    /// Total count carrying `label`.
    pub fn count_label(&self, label: Label) -> P::Prob {
        self.boxes.iter().filter(|b| b.label == label).fold(P::Prob::zero(), |acc, b| acc + b.count.clone())
    }

    pub fn extend(&mut self, other: Pool<P>) {
        for b in other.boxes {
            self.push_entry(b);
        }
    }

    /// Merge entries with equal state and label.
    pub fn compact(&mut self) {
        let mut merged: Vec<LabeledBox<P>> = Vec::with_capacity(self.boxes.len());
        for b in self.boxes.drain(..) {
            match merged.iter_mut().find(|m| m.label == b.label && m.state == b.state) {
                Some(m) => m.count = m.count.clone() + b.count,
                None => merged.push(b),
            }
        }
        self.boxes = merged;
    }

    pub fn map_states(self, f: impl Fn(&P) -> P) -> Self {
        let boxes = self.boxes.into_iter().map(|b| LabeledBox { state: f(&b.state), ..b }).collect();
        let mut pool = Self { boxes };
        pool.compact();
        pool
    }

    /// Relabel every box. Returns `None` on a backward transition.
    pub fn relabel(self, label: Label) -> Option<Self> {
        let mut boxes = Vec::with_capacity(self.boxes.len());
        for b in self.boxes {
            if !b.label.can_become(label) {
                return None;
            }
            boxes.push(LabeledBox { label, ..b });
        }
        Some(Self { boxes })
    }

    /// Remove and return a random `num/den` share of the pool.
    pub fn take_fraction(&mut self, num: u64, den: u64, exec: &mut Execution) -> Pool<P> {
        let total = self.total();
        let take = exec.fraction(&total, num, den);
        self.take(&take, exec)
    }

    /// Remove and return a uniformly random subset of `amount` boxes.
    pub fn take(&mut self, amount: &P::Prob, exec: &mut Execution) -> Pool<P> {
        let counts: Vec<P::Prob> = self.boxes.iter().map(|b| b.count.clone()).collect();
        let drawn = exec.draw(&counts, amount);
        let mut taken = Pool::new();
        let mut kept = Vec::with_capacity(self.boxes.len());
        for (b, d) in self.boxes.drain(..).zip(drawn) {
            let remaining = b.count.clone() - d.clone();
            if !d.is_zero_ish() {
                taken.boxes.push(LabeledBox { id: exec.fresh_id(), state: b.state.clone(), label: b.label, count: d });
            }
            if remaining > P::Prob::zero() && !remaining.is_zero_ish() {
                kept.push(LabeledBox { count: remaining, ..b });
            }
        }
        self.boxes = kept;
        taken
    }

    /// Measure `side` of every box; returns the `h` and `t` sub-pools with collapsed states.
    pub fn measure(self, side: Side, meter: &dyn Meter<P>, exec: &mut Execution) -> Measured<P> {
        let mut heads = Pool::new();
        let mut tails = Pool::new();
        for b in self.boxes {
            let [h, t] = meter.measure(&b.state, side);
            let (n_h, n_t) = exec.split(&b.count, &h.prob);
            for (branch, n, pool) in [(h, n_h, &mut heads), (t, n_t, &mut tails)] {
                if let Some(post) = branch.post {
                    pool.push(post, b.label, n, exec);
                }
            }
        }
        heads.compact();
        tails.compact();
        Measured { heads, tails }
    }

    /// Count-weighted h-probability of `side` across the pool.
    pub fn expected_h(&self, side: Side) -> P::Prob {
        let total = self.total();
        let mass = self.boxes.iter().fold(P::Prob::zero(), |acc, b| acc + b.count.clone() * b.state.prob_h(side));
        mass / total
    }
}

#[derive(Debug, Clone)]
pub struct Measured<P: BoxPhysics> {
    pub heads: Pool<P>,
    pub tails: Pool<P>,
}

impl<P: BoxPhysics> Measured<P> {
    pub fn get(&self, outcome: Outcome) -> &Pool<P> {
        match outcome {
            Outcome::H => &self.heads,
            Outcome::T => &self.tails,
        }
    }

    pub fn rejoin(self) -> Pool<P> {
        let mut pool = self.heads;
        pool.extend(self.tails);
        pool.compact();
        pool
    }
}

/// Mode, random stream and id allocator for one game.
#[derive(Debug, Clone)]
pub struct Execution {
    mode: Mode,
    rng: ChaCha8Rng,
    next_id: u64,
}

impl Execution {
    pub fn new(mode: Mode, seed: u64) -> Self {
        Self { mode, rng: ChaCha8Rng::seed_from_u64(seed), next_id: 0 }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    /// `total · num / den`, rounded down to a whole box in sampled mode.
    pub fn fraction<T: Probability>(&self, total: &T, num: u64, den: u64) -> T {
        match self.mode {
            Mode::Exact => total.clone() * T::from_count(num) / T::from_count(den),
            Mode::Sampled => {
                let n = total.to_count() as u128 * num as u128 / den as u128;
                T::from_count(n as u64)
            }
        }
    }

    /// Split `count` boxes by an outcome of probability `p`: `(hits, misses)`.
    pub fn split<T: Probability>(&mut self, count: &T, p: &T) -> (T, T) {
        match self.mode {
            Mode::Exact => {
                let hits = count.clone() * p.clone();
                let misses = count.clone() - hits.clone();
                (hits, misses)
            }
            Mode::Sampled => {
                let n = count.to_count();
                let pf = p.approx_f64();
                let hits = if pf <= 0.0 {
                    0
                } else if pf >= 1.0 {
                    n
                } else {
                    Binomial::new(n, pf).expect("valid binomial").sample(&mut self.rng)
                };
                (T::from_count(hits), T::from_count(n - hits))
            }
        }
    }

    /// Share of `amount` drawn from each group of sizes `counts`, without replacement.
    pub fn draw<T: Probability>(&mut self, counts: &[T], amount: &T) -> Vec<T> {
        let total = counts.iter().fold(T::zero(), |acc, c| acc + c.clone());
        match self.mode {
            Mode::Exact => {
                if total.is_zero_ish() {
                    return vec![T::zero(); counts.len()];
                }
                counts.iter().map(|c| c.clone() * amount.clone() / total.clone()).collect()
            }
            Mode::Sampled => {
                let mut remaining_total = total.to_count();
                let mut remaining_take = amount.to_count().min(remaining_total);
                let mut out = Vec::with_capacity(counts.len());
                for c in counts {
                    let c = c.to_count();
                    let k = if remaining_take == 0 {
                        0
                    } else if c == remaining_total {
                        remaining_take
                    } else {
                        Hypergeometric::new(remaining_total, c, remaining_take)
                            .expect("valid hypergeometric")
                            .sample(&mut self.rng)
                    };
                    remaining_total -= c;
                    remaining_take -= k;
                    out.push(T::from_count(k));
                }
                out
            }
        }
    }
}
