use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use super::validate_digits;
use crate::error::{Error, Result};
use crate::scalar::{pow10, Probability, Rational};

/// The value `0.d1d2...dn` of a domino string, kept exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StringProbability {
    value: Rational,
    digits: String,
}

impl StringProbability {
    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }

    /// The value converted into another scalar type.
    pub fn as_scalar<T: Probability>(&self) -> T {
        T::from_rational(&self.value)
    }
}

impl fmt::Display for StringProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0.{}", self.digits)
    }
}

impl Serialize for StringProbability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Read a digit string as the decimal fraction `0.s`.
pub fn string_to_probability(s: &str) -> Result<StringProbability> {
    validate_digits(s)?;
    let numer: BigInt = s.parse().expect("validated digits");
    Ok(StringProbability { value: Rational::new(numer, pow10(s.len()).to_integer()), digits: s.to_owned() })
}

/// Round `p` to `max_digits` decimal places (half up) and return the digits that
/// precede the first `'0'`.
///
/// The result may be empty or contain digits outside `1..=4` when `p` is a noisy
/// estimate; callers validate it before building a [`super::Domino`].
pub fn probability_to_string<T: Probability>(p: &T, max_digits: usize) -> Result<String> {
    if max_digits == 0 {
        return Err(Error::InvalidParams("max_digits must be at least 1".into()));
    }
    let value = p.to_rational();
    let half = Rational::new(1.into(), 2.into());
    if !value.is_positive() || value >= half {
        return Err(Error::Domain { value: p.to_string() });
    }
    let scaled = value * pow10(max_digits) + half;
    let rounded: BigInt = scaled.numer().div_floor(scaled.denom());
    debug_assert!(!rounded.is_zero() || max_digits > 0);
    let digits = format!("{:0>width$}", rounded.to_string(), width = max_digits);
    Ok(digits.chars().take_while(|&c| c != '0').collect())
}
