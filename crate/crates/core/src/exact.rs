//! Exact rationals and Rips scales.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact rational number used for distances, scales and radii.
pub type Rat = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse `{0}` as a rational (expected an integer or \"p/q\")")]
pub struct ParseRatError(pub String);

/// Parses `"p"`, `"p/q"` or `"-p/q"`; the denominator must be nonzero.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let err = || ParseRatError(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| err())?;
            let q: i64 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            Ok(Rat::new(p, q))
        }
        None => s.parse::<i64>().map(Rat::from_integer).map_err(|_| err()),
    }
}

/// Formats a rational as `"p"` when integral and `"p/q"` otherwise.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapter writing a [`Rat`] as its string form.
pub mod rat_string {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let raw = RatInput::deserialize(d)?;
        Ok(raw.0)
    }
}

/// A rational as it appears in JSON input: an integer or a `"p/q"` string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatInput(pub Rat);

impl<'de> Deserialize<'de> for RatInput {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(RatInput(Rat::from_integer(v))),
            Raw::Str(s) => parse_rat(&s).map(RatInput).map_err(serde::de::Error::custom),
        }
    }
}

impl Serialize for RatInput {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(&self.0))
    }
}

/// A Rips scale: a finite rational threshold or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Finite(Rat),
    Infinite,
}

impl Scale {
    pub fn finite(n: i64) -> Self {
        Scale::Finite(Rat::from_integer(n))
    }

    /// Largest integer numerator `m` such that `m / denom <= self`, or `None`
    /// for an infinite scale. A negative result means nothing qualifies.
    pub fn numerator_bound(&self, denom: i64) -> Option<i64> {
        match self {
            Scale::Infinite => None,
            Scale::Finite(t) => {
                let scaled = *t * Rat::from_integer(denom);
                Some(scaled.numer().div_floor(scaled.denom()))
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Scale::Infinite)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Finite(t) => f.write_str(&format_rat(t)),
            Scale::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Scale {
    type Err = ParseRatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            Ok(Scale::Infinite)
        } else {
            parse_rat(t).map(Scale::Finite)
        }
    }
}

impl Serialize for Scale {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scale {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Scale::finite(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/6").unwrap(), Rat::new(1, 2));
        assert_eq!(parse_rat("-4").unwrap(), Rat::from_integer(-4));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert_eq!(format_rat(&Rat::new(6, 4)), "3/2");
        assert_eq!(format_rat(&Rat::from_integer(7)), "7");
    }

    #[test]
    fn scale_bounds() {
        assert_eq!(Scale::finite(3).numerator_bound(2), Some(6));
        assert_eq!(Scale::Finite(Rat::new(7, 3)).numerator_bound(1), Some(2));
        assert_eq!(Scale::Finite(Rat::new(-1, 2)).numerator_bound(1), Some(-1));
        assert_eq!(Scale::Infinite.numerator_bound(5), None);
        assert_eq!("inf".parse::<Scale>().unwrap(), Scale::Infinite);
    }
}
