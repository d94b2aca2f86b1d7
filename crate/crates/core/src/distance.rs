//! Exact non-negative rational scale values.
//!
//! Every scale parameter in this crate (distances, thresholds, mesh values,
//! oscillations) is a [`Distance`]. Comparisons against thresholds decide
//! component membership and cover counts, so they must be exact: floating
//! point would silently move points between blocks.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// An exact non-negative rational number, kept in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Distance(BigRational);

/// Error raised when constructing or parsing a [`Distance`].
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DistanceError {
    #[error("distance must be non-negative, got {0}")]
    Negative(String),
    #[error("cannot parse {0:?} as a rational number")]
    Unparseable(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

impl Distance {
    pub const fn zero_const() -> Option<()> {
        // rationals cannot be built in const context; see `Distance::zero()`
        None
    }

    pub fn zero() -> Self {
        Distance(BigRational::zero())
    }

    pub fn one() -> Self {
        Distance(BigRational::one())
    }

    /// Wraps an exact rational, rejecting negative values.
    pub fn new(value: BigRational) -> Result<Self, DistanceError> {
        if value.is_negative() {
            return Err(DistanceError::Negative(value.to_string()));
        }
        Ok(Distance(value))
    }

    pub fn from_int(n: u64) -> Self {
        Distance(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `numer/denom` exactly.
    pub fn from_ratio(numer: u64, denom: u64) -> Result<Self, DistanceError> {
        if denom == 0 {
            return Err(DistanceError::ZeroDenominator(format!("{numer}/{denom}")));
        }
        Ok(Distance(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        )))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// Exact half, used for separation radii.
    pub fn half(&self) -> Self {
        Distance(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn double(&self) -> Self {
        Distance(&self.0 * BigRational::from_integer(BigInt::from(2)))
    }

    pub fn scale_int(&self, factor: u64) -> Self {
        Distance(&self.0 * BigRational::from_integer(BigInt::from(factor)))
    }

    /// Exact (truncated) conversion to f64 for display-adjacent uses only.
    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl Add for Distance {
    type Output = Distance;
    fn add(self, rhs: Distance) -> Distance {
        Distance(self.0 + rhs.0)
    }
}

impl Add<&Distance> for &Distance {
    type Output = Distance;
    fn add(self, rhs: &Distance) -> Distance {
        Distance(&self.0 + &rhs.0)
    }
}

impl fmt::Display for Distance {
    /// Integers print bare, other rationals as `numerator/denominator` in
    /// lowest terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Distance({self})")
    }
}

impl FromStr for Distance {
    type Err = DistanceError;

    /// Accepts `"p"` or `"p/q"` with non-negative integers in arbitrary
    /// precision.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (numer_s, denom_s) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let numer = BigInt::from_str(numer_s)
            .map_err(|_| DistanceError::Unparseable(s.to_string()))?;
        let denom = BigInt::from_str(denom_s)
            .map_err(|_| DistanceError::Unparseable(s.to_string()))?;
        if denom.is_zero() {
            return Err(DistanceError::ZeroDenominator(s.to_string()));
        }
        Distance::new(BigRational::new(numer, denom))
    }
}

impl Serialize for Distance {
    /// Integers that fit a `u64` serialize as JSON numbers; everything else
    /// as a `"p/q"` string in lowest terms.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.denom().is_one() {
            if let Some(n) = self.0.numer().to_u64() {
                return serializer.serialize_u64(n);
            }
        }
        serializer.serialize_str(&self.to_string())
    }
}

struct DistanceVisitor;

impl<'de> Visitor<'de> for DistanceVisitor {
    type Value = Distance;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a non-negative number or a \"p/q\" rational string")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Distance, E> {
        Ok(Distance::from_int(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Distance, E> {
        if v < 0 {
            return Err(E::custom(format!("negative distance {v}")));
        }
        Ok(Distance::from_int(v as u64))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Distance, E> {
        let r = BigRational::from_float(v)
            .ok_or_else(|| E::custom(format!("non-finite distance {v}")))?;
        Distance::new(r).map_err(|e| E::custom(e.to_string()))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Distance, E> {
        v.parse().map_err(|e: DistanceError| E::custom(e.to_string()))
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Distance, D::Error> {
        deserializer.deserialize_any(DistanceVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!("3".parse::<Distance>().unwrap(), Distance::from_int(3));
        assert_eq!(
            "7/2".parse::<Distance>().unwrap(),
            Distance::from_ratio(7, 2).unwrap()
        );
        assert_eq!(
            "6/4".parse::<Distance>().unwrap(),
            Distance::from_ratio(3, 2).unwrap()
        );
    }

    #[test]
    fn rejects_negative_and_bad_input() {
        assert!(matches!(
            "-1".parse::<Distance>(),
            Err(DistanceError::Negative(_))
        ));
        assert!(matches!(
            "1/0".parse::<Distance>(),
            Err(DistanceError::ZeroDenominator(_))
        ));
        assert!("x".parse::<Distance>().is_err());
    }

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(Distance::from_ratio(4, 2).unwrap().to_string(), "2");
        assert_eq!(Distance::from_ratio(10, 4).unwrap().to_string(), "5/2");
    }

    #[test]
    fn json_round_trip_mixed_forms() {
        let vals: Vec<Distance> = serde_json::from_str(r#"[0, 3, "7/2", "49"]"#).unwrap();
        assert_eq!(vals[2], Distance::from_ratio(7, 2).unwrap());
        let back = serde_json::to_string(&vals).unwrap();
        assert_eq!(back, r#"[0,3,"7/2",49]"#);
    }

    #[test]
    fn exact_comparisons() {
        let a = Distance::from_ratio(1, 3).unwrap();
        let b = Distance::from_ratio(333333, 1000000).unwrap();
        assert!(b < a);
        assert_eq!(a.clone() + a.clone(), Distance::from_ratio(2, 3).unwrap());
        assert_eq!(a.double().half(), a);
    }
}
