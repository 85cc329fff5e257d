//! Value types shared by the discrete and Gaussian backends.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} = {value} is out of range ({expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("unknown scheme {0:?} (expected GQF, CF or NO_RELAY)")]
    UnknownScheme(String),
}

/// Fraction of the block during which the relay listens.
///
/// Always strictly inside `(0, 1)`; the endpoints describe one-slot
/// channels where either the relay never hears the sources or never
/// gets to transmit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct SlotFraction(f64);

impl SlotFraction {
    pub fn new(beta: f64) -> Result<Self, ParamError> {
        if beta.is_finite() && beta > 0.0 && beta < 1.0 {
            Ok(SlotFraction(beta))
        } else {
            Err(ParamError::OutOfRange {
                name: "beta",
                value: beta,
                expected: "0 < beta < 1",
            })
        }
    }

    /// Weight of the listening slot.
    pub fn listen(self) -> f64 {
        self.0
    }

    /// Weight of the transmitting slot, `1 - beta`.
    pub fn transmit(self) -> f64 {
        1.0 - self.0
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for SlotFraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let beta = f64::deserialize(d)?;
        SlotFraction::new(beta).map_err(serde::de::Error::custom)
    }
}

/// Checked conversion of a raw slot fraction.
pub fn validate_beta(beta: f64) -> Result<SlotFraction, ParamError> {
    SlotFraction::new(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "GQF")]
    Gqf,
    #[serde(rename = "CF")]
    Cf,
    #[serde(rename = "NO_RELAY")]
    NoRelay,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::Gqf, SchemeId::Cf, SchemeId::NoRelay];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Gqf => "GQF",
            SchemeId::Cf => "CF",
            SchemeId::NoRelay => "NO_RELAY",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GQF" => Ok(SchemeId::Gqf),
            "CF" => Ok(SchemeId::Cf),
            "NO_RELAY" | "NORELAY" | "NO-RELAY" => Ok(SchemeId::NoRelay),
            _ => Err(ParamError::UnknownScheme(s.to_string())),
        }
    }
}

/// Individual-rate and sum-rate bounds in bits per channel use.
///
/// The region is `{R1 <= r1_max, R2 <= r2_max, R1 + R2 <= sum_max}`.
/// `terms` keeps the unclamped building blocks (named `a1(2)`, `c1`, `I1`,
/// `sigma_min`, ...) for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub r1_max: f64,
    pub r2_max: f64,
    pub sum_max: f64,
    pub feasible: bool,
    pub terms: BTreeMap<String, f64>,
}

impl RateRegion {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.get(name).copied()
    }

    pub fn with_terms(mut self, terms: impl IntoIterator<Item = (String, f64)>) -> Self {
        self.terms.extend(terms);
        self
    }
}

/// Turns raw bounds into a [`RateRegion`]: negatives become zero and the
/// sum bound never exceeds `r1_max + r2_max`.
pub fn clamp_region(r1: f64, r2: f64, sum: f64) -> RateRegion {
    let r1_max = r1.max(0.0);
    let r2_max = r2.max(0.0);
    let sum_max = sum.max(0.0).min(r1_max + r2_max);
    RateRegion {
        r1_max,
        r2_max,
        sum_max,
        feasible: true,
        terms: BTreeMap::new(),
    }
}
