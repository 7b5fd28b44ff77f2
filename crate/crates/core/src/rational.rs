//! Exact rational probabilities.
//!
//! Every probability in the library is a [`Rat`] (an arbitrary-precision
//! rational kept in canonical reduced form, denominator positive). The
//! consistency checks are equality checks, so no floating point appears
//! anywhere on a checking path.
//!
//! The wire format for a rational is the string `"p/q"` (reduced, `q > 0`)
//! or a plain integer string. Decimal literals are rejected.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number. `num_rational::Ratio` keeps the
/// canonical form invariants (reduced, positive denominator) on every
/// operation.
pub type Rat = num_rational::BigRational;

/// Errors from parsing a rational string.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatParseError {
    #[error("empty string is not a rational")]
    Empty,
    #[error("decimal notation `{0}` is not accepted; write an exact fraction such as \"3/4\"")]
    DecimalNotation(String),
    #[error("cannot parse `{0}` as a rational; expected \"p/q\" or an integer")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Shorthand for building a rational from machine integers.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"` or an integer string into a [`Rat`].
pub fn parse_rat(text: &str) -> Result<Rat, RatParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(RatParseError::Empty);
    }
    if trimmed.contains('.') {
        return Err(RatParseError::DecimalNotation(trimmed.to_string()));
    }
    match trimmed.split_once('/') {
        None => trimmed
            .parse::<BigInt>()
            .map(Rat::from_integer)
            .map_err(|_| RatParseError::Malformed(trimmed.to_string())),
        Some((num, den)) => {
            let numer: BigInt = num
                .trim()
                .parse()
                .map_err(|_| RatParseError::Malformed(trimmed.to_string()))?;
            let denom: BigInt = den
                .trim()
                .parse()
                .map_err(|_| RatParseError::Malformed(trimmed.to_string()))?;
            if denom.is_zero() {
                return Err(RatParseError::ZeroDenominator(trimmed.to_string()));
            }
            Ok(Rat::new(numer, denom))
        }
    }
}

/// Formats a rational as `"p/q"`, or just `"p"` when the denominator is 1.
pub fn format_rat(value: &Rat) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// True iff the value lies in the closed interval [0, 1].
pub fn is_probability(value: &Rat) -> bool {
    !value.is_negative() && *value <= Rat::one()
}
