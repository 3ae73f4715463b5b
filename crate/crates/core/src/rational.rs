//! Exact rational numbers and their string encoding.
//!
//! Every value in the crate (valuations, prices, welfare) is a
//! [`Rational`]. Text form is either a fraction (`"3/2"`, `"-7"`) or a
//! finite decimal (`"1.5"`); both parse exactly. Output always uses the
//! fraction form.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// `numer / denom` as an exact rational. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn from_usize(value: usize) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

pub fn half(value: &Rational) -> Rational {
    value / int(2)
}

fn parse_integer(text: &str, original: &str) -> Result<BigInt, ParseRationalError> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Invalid(original.to_string()));
    }
    text.parse::<BigInt>()
        .map_err(|_| ParseRationalError::Invalid(original.to_string()))
}

/// Parses `"a/b"`, `"a"` or a finite decimal `"a.bcd"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((numer, denom)) = trimmed.split_once('/') {
        let numer = parse_integer(numer.trim(), trimmed)?;
        let denom = parse_integer(denom.trim(), trimmed)?;
        if denom.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(trimmed.to_string()));
        }
        return Ok(Rational::new(numer, denom));
    }
    if let Some((whole, frac)) = trimmed.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.strip_prefix(['+', '-']).unwrap_or(whole);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError::Invalid(trimmed.to_string()));
        }
        let whole_value = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            parse_integer(whole_digits, trimmed)?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_value = parse_integer(frac, trimmed)?;
        let magnitude = Rational::new(whole_value * &scale + frac_value, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    Ok(Rational::from_integer(parse_integer(trimmed, trimmed)?))
}

/// Canonical fraction text: `"3/2"`, `"-1/4"`, or `"5"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: fall back through scaled integers.
        let digits = 30u32;
        let scaled = (value.numer() * num_traits::pow(BigInt::from(10), digits as usize)) / value.denom();
        scaled.to_f64().unwrap_or(f64::NAN) / 10f64.powi(digits as i32)
    })
}

/// Display adapter printing the canonical fraction form.
pub struct Frac<'a>(pub &'a Rational);

impl fmt::Display for Frac<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

/// Euler's number as a fixed rational with 20 significant decimal digits.
pub fn euler_e() -> Rational {
    parse_rational("2.7182818284590452354").expect("literal")
}

/// Bisection on a sign change of `f` over `[lo, hi]` until the bracket is
/// narrower than `width`. Returns the lower end of the final bracket.
pub fn bisect<F>(f: F, mut lo: Rational, mut hi: Rational, width: &Rational) -> Rational
where
    F: Fn(&Rational) -> Rational,
{
    let lo_sign = f(&lo).is_positive();
    while &(&hi - &lo) > width {
        let mid = half(&(&lo + &hi));
        if f(&mid).is_positive() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Serde adapter: a single rational as a JSON string (integers are also accepted).
pub mod serde_str {
    use super::*;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a rational string such as \"3/2\" or \"1.5\"")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }
    }
}

/// Serde adapter: a sequence of rationals as JSON strings.
pub mod serde_vec {
    use super::*;
    use serde::de::{Deserializer, SeqAccess, Visitor};
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(values.len()))?;
        for value in values {
            seq.serialize_element(&format_rational(value))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Rational>, D::Error> {
        struct SeqVisitor;

        impl<'de> Visitor<'de> for SeqVisitor {
            type Value = Vec<Rational>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of rational strings")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(value) = seq.next_element::<Wrapped>()? {
                    out.push(value.0);
                }
                Ok(out)
            }
        }

        deserializer.deserialize_seq(SeqVisitor)
    }

    struct Wrapped(Rational);

    impl<'de> serde::Deserialize<'de> for Wrapped {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
            deserializer
                .deserialize_any(super::serde_str::RationalVisitor)
                .map(Wrapped)
        }
    }
}
