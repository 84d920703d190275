//! Measurement and mixing devices a player hands to the verifiers.

use num_traits::One;
use std::fmt::Debug;
use std::sync::Arc;

use crate::classical::{mix_box, ClassicalBox};
use crate::physics::{BoxPhysics, Joint, Outcome, Side};
use crate::quantum::{apply_mix_both, MixingUnitary, QuantumBox};
use crate::scalar::{Probability, Real};

/// One possible result of a measurement.
#[derive(Debug, Clone)]
pub struct Branch<P: BoxPhysics> {
    pub outcome: Outcome,
    pub prob: P::Prob,
    /// State after the measurement, `None` for an impossible branch.
    pub post: Option<P>,
}

pub trait Meter<P: BoxPhysics>: Debug + Send + Sync {
    fn name(&self) -> String;

    /// The `h` and `t` branches, in that order.
    fn measure(&self, state: &P, side: Side) -> [Branch<P>; 2];
}

pub trait Mixer<P: BoxPhysics>: Debug + Send + Sync {
    fn name(&self) -> String;

    /// Act on both compartments.
    fn mix(&self, state: &P) -> P;
}

/// Projective measurement in the h/t basis with collapse.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectiveMeter;

impl<P: BoxPhysics> Meter<P> for ProjectiveMeter {
    fn name(&self) -> String {
        "projective".into()
    }

    fn measure(&self, state: &P, side: Side) -> [Branch<P>; 2] {
        let p_h = state.prob_h(side);
        let p_t = P::Prob::one() - p_h.clone();
        [
            Branch { outcome: Outcome::H, prob: p_h, post: state.condition(side, Outcome::H) },
            Branch { outcome: Outcome::T, prob: p_t, post: state.condition(side, Outcome::T) },
        ]
    }
}

/// Reports outcomes with the right statistics but never updates the state.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForgetfulMeter;

impl<P: BoxPhysics> Meter<P> for ForgetfulMeter {
    fn name(&self) -> String {
        "forgetful".into()
    }

    fn measure(&self, state: &P, side: Side) -> [Branch<P>; 2] {
        let p_h = state.prob_h(side);
        let p_t = P::Prob::one() - p_h.clone();
        [
            Branch { outcome: Outcome::H, prob: p_h, post: Some(state.clone()) },
            Branch { outcome: Outcome::T, prob: p_t, post: Some(state.clone()) },
        ]
    }
}

/// The constant stochastic map `½[[1, 1], [1, 1]]` on each compartment.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClassicalMixer;

impl<T: Probability> Mixer<ClassicalBox<T>> for ClassicalMixer {
    fn name(&self) -> String {
        "classical-stochastic".into()
    }

    fn mix(&self, state: &ClassicalBox<T>) -> ClassicalBox<T> {
        mix_box(state)
    }
}

/// A broken mixer that always leaves both coins showing heads.
#[derive(Debug, Clone, Copy, Default)]
pub struct RiggedMixer;

impl<T: Probability> Mixer<ClassicalBox<T>> for RiggedMixer {
    fn name(&self) -> String {
        "rigged-heads".into()
    }

    fn mix(&self, _state: &ClassicalBox<T>) -> ClassicalBox<T> {
        ClassicalBox::basis(Joint::HH)
    }
}

/// `M[χ] ⊗ M[χ]`.
#[derive(Debug, Clone, Copy)]
pub struct QuantumMixer<T> {
    pub unitary: MixingUnitary<T>,
}

impl<T: Real> QuantumMixer<T> {
    pub fn new(unitary: MixingUnitary<T>) -> Self {
        Self { unitary }
    }
}

impl<T: Real> Default for QuantumMixer<T> {
    fn default() -> Self {
        Self { unitary: MixingUnitary::standard() }
    }
}

impl<T: Real> Mixer<QuantumBox<T>> for QuantumMixer<T> {
    fn name(&self) -> String {
        format!("quantum-unitary(chi={})", self.unitary.chi())
    }

    fn mix(&self, state: &QuantumBox<T>) -> QuantumBox<T> {
        apply_mix_both(&self.unitary, state)
    }
}

/// The device pair submitted with a domino's boxes.
#[derive(Debug, Clone)]
pub struct Devices<P: BoxPhysics> {
    pub meter: Arc<dyn Meter<P>>,
    pub mixer: Arc<dyn Mixer<P>>,
}

impl<P: BoxPhysics> Devices<P> {
    pub fn new(meter: impl Meter<P> + 'static, mixer: impl Mixer<P> + 'static) -> Self {
        Self { meter: Arc::new(meter), mixer: Arc::new(mixer) }
    }
}

impl<T: Probability> Devices<ClassicalBox<T>> {
    pub fn classical() -> Self {
        Self::new(ProjectiveMeter, ClassicalMixer)
    }
}

impl<T: Real> Devices<QuantumBox<T>> {
    pub fn quantum(unitary: MixingUnitary<T>) -> Self {
        Self::new(ProjectiveMeter, QuantumMixer::new(unitary))
    }
}
