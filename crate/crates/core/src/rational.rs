//! Exact rational numbers used for every probability in the engine.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Rational = BigRational;

/// Error produced when a numeric literal cannot be read as a rational.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Builds `num/den` as a rational. Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses decimal (`0.35`, `1`, `.5`), fraction (`13/30`) and power-of-two
/// (`2^-10`) literals exactly.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let s = text.trim();
    let err = || RationalParseError(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((base, exp)) = s.split_once('^') {
        let base = parse_rational(base).map_err(|_| err())?;
        let exp: i32 = exp.trim().parse().map_err(|_| err())?;
        if base.is_zero() && exp < 0 {
            return Err(err());
        }
        return Ok(pow(&base, exp));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_rational(num).map_err(|_| err())?;
        let den = parse_rational(den).map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(num / den);
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err())?
    };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(numer, denom);
    Ok(if negative { -value } else { value })
}

fn pow(base: &Rational, exp: i32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..exp.unsigned_abs() {
        out *= base;
    }
    if exp < 0 {
        out.recip()
    } else {
        out
    }
}

/// Renders `q` as `p/q` (or `p` for integers).
pub fn to_fraction_string(q: &Rational) -> String {
    q.to_string()
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Terminating decimal expansion when the denominator has only factors 2
/// and 5, otherwise `None`.
pub fn to_exact_decimal(q: &Rational) -> Option<String> {
    let mut den = q.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = q * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let sign = if q.is_negative() { "-" } else { "" };
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (whole, frac) = padded.split_at(padded.len() - places);
    Some(format!("{sign}{whole}.{frac}"))
}

/// Human-friendly rendering: exact decimal when one exists, else `p/q`.
pub struct Pretty<'a>(pub &'a Rational);

impl fmt::Display for Pretty<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match to_exact_decimal(self.0) {
            Some(d) => f.write_str(&d),
            None => write!(f, "{}", self.0),
        }
    }
}
