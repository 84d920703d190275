//! Vocabulary shared by the classical and quantum box models.

use std::fmt::{self, Debug};

use serde::{Deserialize, Serialize};

use crate::scalar::Probability;

/// Compartment of a box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "L",
            Side::Right => "R",
        })
    }
}

/// Result of measuring one coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    H,
    T,
}

/// Joint outcome of both compartments, left first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Joint {
    HH,
    HT,
    TH,
    TT,
}

impl Joint {
    pub const ALL: [Joint; 4] = [Joint::HH, Joint::HT, Joint::TH, Joint::TT];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn new(left: Outcome, right: Outcome) -> Joint {
        match (left, right) {
            (Outcome::H, Outcome::H) => Joint::HH,
            (Outcome::H, Outcome::T) => Joint::HT,
            (Outcome::T, Outcome::H) => Joint::TH,
            (Outcome::T, Outcome::T) => Joint::TT,
        }
    }

    pub fn on(self, side: Side) -> Outcome {
        let i = self.index();
        let bit = match side {
            Side::Left => i >> 1,
            Side::Right => i & 1,
        };
        if bit == 0 {
            Outcome::H
        } else {
            Outcome::T
        }
    }
}

impl fmt::Display for Joint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["hh", "ht", "th", "tt"][self.index()])
    }
}

/// A two-compartment box state that the protocol can measure and condition.
pub trait BoxPhysics: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Prob: Probability;

    /// Probability that measuring `side` yields `h`.
    fn prob_h(&self, side: Side) -> Self::Prob;

    /// State after observing `outcome` on `side`; `None` for a probability-zero branch.
    fn condition(&self, side: Side, outcome: Outcome) -> Option<Self>;

    /// Outcome probabilities in the order hh, ht, th, tt.
    fn joint_distribution(&self) -> [Self::Prob; 4];

    /// Short human readable rendering used in transcripts.
    fn describe(&self) -> String;

    fn kind() -> PhysicsKind;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhysicsKind {
    Classical,
    Quantum,
}

impl fmt::Display for PhysicsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhysicsKind::Classical => "classical",
            PhysicsKind::Quantum => "quantum",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_outcomes_decompose() {
        for j in Joint::ALL {
            assert_eq!(Joint::new(j.on(Side::Left), j.on(Side::Right)), j);
        }
        assert_eq!(Joint::TH.on(Side::Left), Outcome::T);
        assert_eq!(Joint::TH.on(Side::Right), Outcome::H);
    }
}
