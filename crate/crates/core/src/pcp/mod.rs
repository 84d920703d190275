//! Post correspondence problem instances over the alphabet `{1, 2, 3, 4}`.

mod codec;
mod format;
mod generate;
mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use codec::{probability_to_string, string_to_probability, StringProbability};
pub use format::{parse_instance, serialize_instance};
pub use generate::{random_instance, GeneratorParams};
pub use search::{decide_fragment, find_match, search, MatchSearch, SearchBudget, SearchReport};

/// Validate a domino string: nonempty, digits `1..=4` only.
pub fn validate_digits(s: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::EmptyString);
    }
    match s.chars().enumerate().find(|(_, c)| !matches!(c, '1'..='4')) {
        Some((position, ch)) => Err(Error::InvalidDigit { position, ch }),
        None => Ok(()),
    }
}

/// A tile with a numerator (top) and denominator (bottom) string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(String, String)", into = "(String, String)")]
pub struct Domino {
    numerator: String,
    denominator: String,
}

impl Domino {
    pub fn new(numerator: impl Into<String>, denominator: impl Into<String>) -> Result<Self> {
        let numerator = numerator.into();
        let denominator = denominator.into();
        validate_digits(&numerator)?;
        validate_digits(&denominator)?;
        Ok(Self { numerator, denominator })
    }

    pub fn numerator(&self) -> &str {
        &self.numerator
    }

    pub fn denominator(&self) -> &str {
        &self.denominator
    }

    /// `k_i`, the numerator's string probability.
    pub fn k(&self) -> StringProbability {
        string_to_probability(&self.numerator).expect("validated on construction")
    }

    /// `q_i`, the denominator's string probability.
    pub fn q(&self) -> StringProbability {
        string_to_probability(&self.denominator).expect("validated on construction")
    }

    pub fn is_trivial(&self) -> bool {
        self.numerator == self.denominator
    }

    pub fn max_len(&self) -> usize {
        self.numerator.len().max(self.denominator.len())
    }
}

impl TryFrom<(String, String)> for Domino {
    type Error = Error;

    fn try_from((n, d): (String, String)) -> Result<Self> {
        Domino::new(n, d)
    }
}

impl From<Domino> for (String, String) {
    fn from(d: Domino) -> Self {
        (d.numerator, d.denominator)
    }
}

impl fmt::Display for Domino {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// An ordered, nonempty collection of dominoes named `A1, A2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Domino>", into = "Vec<Domino>")]
pub struct PcpInstance {
    dominoes: Vec<Domino>,
}

impl PcpInstance {
    pub fn new(dominoes: Vec<Domino>) -> Result<Self> {
        if dominoes.is_empty() {
            return Err(Error::EmptyInstance);
        }
        Ok(Self { dominoes })
    }

    /// Convenience constructor from `(numerator, denominator)` literals.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<Self> {
        let dominoes = pairs
            .iter()
            .map(|(n, d)| Domino::new(n.as_ref(), d.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dominoes)
    }

    pub fn dominoes(&self) -> &[Domino] {
        &self.dominoes
    }

    pub fn len(&self) -> usize {
        self.dominoes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dominoes.is_empty()
    }

    /// Domino by 1-based index.
    pub fn get(&self, index: usize) -> Result<&Domino> {
        index
            .checked_sub(1)
            .and_then(|i| self.dominoes.get(i))
            .ok_or(Error::IndexOutOfRange { index, len: self.dominoes.len() })
    }

    /// Length of the longest string in the instance (`l_max`).
    pub fn max_string_len(&self) -> usize {
        self.dominoes.iter().map(Domino::max_len).max().unwrap_or(0)
    }

    /// Smallest string probability over all numerators and denominators (`p_min`).
    pub fn min_probability(&self) -> StringProbability {
        self.dominoes
            .iter()
            .flat_map(|d| [d.k(), d.q()])
            .min_by(|a, b| a.value().cmp(b.value()))
            .expect("instance is nonempty")
    }
}

impl TryFrom<Vec<Domino>> for PcpInstance {
    type Error = Error;

    fn try_from(dominoes: Vec<Domino>) -> Result<Self> {
        PcpInstance::new(dominoes)
    }
}

impl From<PcpInstance> for Vec<Domino> {
    fn from(p: PcpInstance) -> Self {
        p.dominoes
    }
}

/// The claim a player sends: an ordering of 1-based domino indices, or "no match".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arrangement {
    Order(Vec<usize>),
    NoMatch,
}

impl Arrangement {
    pub fn order(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyArrangement);
        }
        Ok(Arrangement::Order(indices))
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arrangement::NoMatch => write!(f, "no match"),
            Arrangement::Order(ix) => {
                let names: Vec<String> = ix.iter().map(|i| format!("A{i}")).collect();
                write!(f, "{}", names.join(" "))
            }
        }
    }
}

/// True iff concatenating numerators along `order` equals concatenating denominators.
pub fn check_arrangement(instance: &PcpInstance, arrangement: &Arrangement) -> Result<bool> {
    let order = match arrangement {
        Arrangement::Order(order) if !order.is_empty() => order,
        _ => return Err(Error::EmptyArrangement),
    };
    let mut top = String::new();
    let mut bottom = String::new();
    for &index in order {
        let domino = instance.get(index)?;
        top.push_str(domino.numerator());
        bottom.push_str(domino.denominator());
    }
    Ok(top == bottom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_and_foreign_digits() {
        assert_eq!(Domino::new("120", "1"), Err(Error::InvalidDigit { position: 2, ch: '0' }));
        assert_eq!(Domino::new("1", "5"), Err(Error::InvalidDigit { position: 0, ch: '5' }));
        assert_eq!(Domino::new("", "1"), Err(Error::EmptyString));
        assert_eq!(PcpInstance::new(vec![]), Err(Error::EmptyInstance));
    }

    #[test]
    fn checks_arrangements() {
        let single = PcpInstance::from_pairs(&[("12", "12")]).unwrap();
        assert!(check_arrangement(&single, &Arrangement::Order(vec![1])).unwrap());

        let pair = PcpInstance::from_pairs(&[("1", "111"), ("11", "1")]).unwrap();
        let arr = Arrangement::Order(vec![1, 2, 2]);
        let top: String = ["1", "11", "11"].concat();
        let bottom: String = ["111", "1", "1"].concat();
        assert_eq!(top, bottom);
        assert!(check_arrangement(&pair, &arr).unwrap());

        let bad = PcpInstance::from_pairs(&[("1", "2")]).unwrap();
        assert!(!check_arrangement(&bad, &Arrangement::Order(vec![1])).unwrap());
    }

    #[test]
    fn arrangement_index_out_of_range() {
        let inst = PcpInstance::from_pairs(&[("1", "2")]).unwrap();
        assert_eq!(
            check_arrangement(&inst, &Arrangement::Order(vec![2])),
            Err(Error::IndexOutOfRange { index: 2, len: 1 })
        );
        assert_eq!(
            check_arrangement(&inst, &Arrangement::Order(vec![0])),
            Err(Error::IndexOutOfRange { index: 0, len: 1 })
        );
        assert!(check_arrangement(&inst, &Arrangement::NoMatch).is_err());
    }

    #[test]
    fn instance_statistics() {
        let inst = PcpInstance::from_pairs(&[("121", "34"), ("4", "11")]).unwrap();
        assert_eq!(inst.max_string_len(), 3);
        assert_eq!(inst.min_probability().digits(), "11");
    }
}
