//! Real parameters that stay exact when given as integers or fractions.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational, or a float when the input had no exact reading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scalar {
    Exact(Rational64),
    Float(f64),
}

impl Scalar {
    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(Rational64::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(Rational64::new(n, d))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => x,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Float(x) => x == 0.0,
        }
    }

    pub fn exact(self) -> Option<Rational64> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Float(_) => None,
        }
    }
}

/// Parses "3", "-1/3", "0.25" exactly (a terminating decimal with at most 15
/// fractional digits); anything else that parses as f64 becomes a float.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Format(format!("not a number: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(Error::Format(format!("zero denominator in {s:?}")));
            }
            return Ok(Scalar::Exact(Rational64::new(n, d)));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Scalar::from_int(n));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Scalar::Exact(r));
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        if !x.is_finite() {
            return Err(bad());
        }
        Ok(Scalar::Float(x))
    }
}

fn parse_decimal(s: &str) -> Option<Rational64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: i64 = format!("{int}{frac}").parse().ok()?;
    let den = 10i64.checked_pow(frac.len() as u32)?;
    let r = Rational64::new(digits, den);
    Some(if neg { -r } else { r })
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Scalar::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarInput {
    Int(i64),
    Float(f64),
    Text(String),
}

/// Integers and strings deserialize exactly; bare TOML/JSON floats go through
/// their shortest decimal rendering, so 0.5 is exact but 0.1 + rounding is not
/// re-introduced.
impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ScalarInput::deserialize(d)? {
            ScalarInput::Int(n) => Ok(Scalar::from_int(n)),
            ScalarInput::Float(x) => format!("{x:?}").parse().map_err(serde::de::Error::custom),
            ScalarInput::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!("1/3".parse::<Scalar>().unwrap(), Scalar::ratio(1, 3));
        assert_eq!("-2".parse::<Scalar>().unwrap(), Scalar::from_int(-2));
        assert_eq!("0.25".parse::<Scalar>().unwrap(), Scalar::ratio(1, 4));
        assert_eq!("-1.5".parse::<Scalar>().unwrap(), Scalar::ratio(-3, 2));
        assert!(matches!("1e-3".parse::<Scalar>().unwrap(), Scalar::Float(_)));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
        assert!("inf".parse::<Scalar>().is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["7", "-2/9", "0.125"] {
            let x: Scalar = s.parse().unwrap();
            assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
        }
    }
}
