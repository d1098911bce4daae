//! Exact rational edge weights.
//!
//! Weights are arbitrary-precision rationals; no floating point appears anywhere
//! in the evaluation or verification paths. The textual form is `p/q` in lowest
//! terms, or a bare integer when the denominator is one.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Weight = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid weight `{text}`: {reason}")]
pub struct WeightParseError {
    pub text: String,
    pub reason: String,
}

pub fn ratio(numer: i64, denom: i64) -> Weight {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Weight {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> Weight {
    Weight::zero()
}

pub fn one() -> Weight {
    Weight::one()
}

pub fn in_unit_interval(w: &Weight) -> bool {
    *w >= zero() && *w <= one()
}

pub fn format_weight(w: &Weight) -> String {
    // BigRational is always reduced and prints integers without a denominator.
    w.to_string()
}

pub fn parse_weight(text: &str) -> Result<Weight, WeightParseError> {
    let err = |reason: &str| WeightParseError {
        text: text.to_string(),
        reason: reason.to_string(),
    };
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(err("empty"));
    }
    if let Some((n, d)) = trimmed.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err("bad numerator"))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n = BigInt::from_str(trimmed).map_err(|_| err("not an integer or fraction"))?;
        Ok(BigRational::from_integer(n))
    }
}

/// A weight that serializes as its `p/q` string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct WeightText(#[serde(with = "serde_str")] pub Weight);

/// Serde adapter storing a weight as its `p/q` string.
pub mod serde_str {
    use super::{format_weight, parse_weight, Weight};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Weight, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_weight(w))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Weight, D::Error> {
        let text = String::deserialize(d)?;
        parse_weight(&text).map_err(serde::de::Error::custom)
    }
}
