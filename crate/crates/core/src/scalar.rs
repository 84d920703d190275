//! Scalar abstractions shared by the classical and quantum models.
//!
//! Classical probabilities are generic over [`Probability`], which is
//! implemented for exact rationals and for `f32`/`f64`. Quantum amplitudes
//! are generic over [`Real`], the floating point types.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational used for exact mode.
pub type Rational = BigRational;

/// A number that can carry a probability or a (possibly fractional) box count.
pub trait Probability:
    Clone + Debug + Display + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// `true` when arithmetic is exact and [`Probability::is_close`] is equality.
    const EXACT: bool;

    fn from_rational(r: &Rational) -> Self;

    /// Exact value of `self` as a rational (floats convert their binary value).
    fn to_rational(&self) -> Rational;

    fn approx_f64(&self) -> f64;

    fn from_count(n: u64) -> Self;

    /// Integer part, for values used as sampled box counts.
    fn to_count(&self) -> u64;

    /// Equality for exact types, a relative tolerance for floats.
    fn is_close(&self, other: &Self) -> bool;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    fn is_zero_ish(&self) -> bool {
        self.is_close(&Self::zero())
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

impl Probability for Rational {
    const EXACT: bool = true;

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_count(n: u64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn to_count(&self) -> u64 {
        self.floor().to_integer().to_u64().unwrap_or(0)
    }

    fn is_close(&self, other: &Self) -> bool {
        self == other
    }
}

macro_rules! float_probability {
    ($t:ty, $tol:expr) => {
        impl Probability for $t {
            const EXACT: bool = false;

            fn from_rational(r: &Rational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn to_rational(&self) -> Rational {
                Rational::from_float(*self).unwrap_or_else(Rational::zero)
            }

            fn approx_f64(&self) -> f64 {
                *self as f64
            }

            fn from_count(n: u64) -> Self {
                n as $t
            }

            fn to_count(&self) -> u64 {
                self.max(0.0).floor() as u64
            }

            fn is_close(&self, other: &Self) -> bool {
                let scale = self.abs().max(other.abs()).max(1.0);
                (self - other).abs() <= $tol * scale
            }
        }
    };
}

float_probability!(f64, 1e-12);
float_probability!(f32, 1e-5);

/// Floating point scalar for amplitudes.
pub trait Real: Float + FloatConst + FromPrimitive + Signed + Probability {
    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).unwrap_or_else(Self::nan)
    }
}

impl<T> Real for T where T: Float + FloatConst + FromPrimitive + Signed + Probability {}

/// Parse a plain decimal literal such as `"0.121"` or `"3"` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// `10^exp` as a rational.
pub fn pow10(exp: usize) -> Rational {
    Rational::from_integer(num_traits::pow(BigInt::from(10), exp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals() {
        assert_eq!(parse_decimal("0.121"), Some(Rational::new(121.into(), 1000.into())));
        assert_eq!(parse_decimal("3"), Some(Rational::from_integer(3.into())));
        assert_eq!(parse_decimal(".5"), Some(Rational::new(1.into(), 2.into())));
        assert_eq!(parse_decimal("1e3"), None);
        assert_eq!(parse_decimal(""), None);
    }

    #[test]
    fn float_closeness_is_relative() {
        assert!(1.0f64.is_close(&(1.0 + 1e-13)));
        assert!(!1.0f64.is_close(&(1.0 + 1e-9)));
        assert!(1e6f64.is_close(&(1e6 + 1e-7)));
    }

    #[test]
    fn rational_roundtrip_through_f64_is_exact_binary() {
        let r = <f64 as Probability>::to_rational(&0.5);
        assert_eq!(r, Rational::new(1.into(), 2.into()));
        assert_eq!(Rational::from_count(24).to_count(), 24);
    }
}
