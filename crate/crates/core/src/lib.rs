//! Simulator for a physical Post correspondence game: a player encodes PCP
//! dominoes into two-coin boxes that pass through device, count and encoding
//! checks before a referee decodes them. Classical players can only win by
//! solving the instance; a quantum player wins every game through
//! interference. A small logic module builds the matching decision-problem
//! families.
//!
//! Probability code is generic over [`Probability`] (exact rationals, `f64`,
//! `f32`); the aliases below fix the common choices.

pub mod classical;
pub mod error;
pub mod experiment;
pub mod logic;
pub mod pcp;
pub mod physics;
pub mod protocol;
pub mod quantum;
pub mod scalar;
pub mod strategies;

pub use classical::{ClassicalBox, ClassicalCoin};
pub use error::{Error, Result};
pub use pcp::{Arrangement, Domino, PcpInstance};
pub use physics::{BoxPhysics, Joint, Outcome, Side};
pub use protocol::{run_game, GameConfig, GameTranscript, Mode, Verdict};
pub use quantum::{MixingUnitary, QuantumBox, QubitState};
pub use scalar::{Probability, Rational, Real};
pub use strategies::{strategy_by_name, PlayerStrategy};

pub type RationalBox = ClassicalBox<Rational>;
pub type FloatBox = ClassicalBox<f64>;
pub type RationalCoin = ClassicalCoin<Rational>;
pub type QuantumBox64 = QuantumBox<f64>;
pub type QuantumBox32 = QuantumBox<f32>;
pub type Qubit64 = QubitState<f64>;
pub type Mixing64 = MixingUnitary<f64>;
