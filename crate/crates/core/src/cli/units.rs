//! Unit-suffixed physical quantities, e.g. `"5.5e9 amu"`, `"100 s"`,
//! `"1e15 m^-2 s^-1"`.
//!
//! Values are held in SI (dB for squeezing, rad for angles) and serialised
//! back with the canonical unit, so a parsed config re-serialises to text that
//! parses to the identical value.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::AMU_KG;
use crate::error::{Error, Result};

const YEAR_S: f64 = 365.25 * 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Mass,
    AngularFrequency,
    Time,
    Length,
    /// m^-2 s^-1
    DiffusionRate,
    /// s^-1
    Rate,
    /// Variance ratio in dB.
    Squeezing,
    Angle,
    Dimensionless,
}

impl Dimension {
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Mass => "kg",
            Dimension::AngularFrequency => "rad/s",
            Dimension::Time => "s",
            Dimension::Length => "m",
            Dimension::DiffusionRate => "m^-2 s^-1",
            Dimension::Rate => "s^-1",
            Dimension::Squeezing => "dB",
            Dimension::Angle => "rad",
            Dimension::Dimensionless => "",
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dimension::Mass => "mass",
            Dimension::AngularFrequency => "angular frequency",
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::DiffusionRate => "diffusion rate",
            Dimension::Rate => "rate",
            Dimension::Squeezing => "squeezing",
            Dimension::Angle => "angle",
            Dimension::Dimensionless => "dimensionless number",
        }
    }
}

/// `(suffix, dimension, factor to canonical unit)`. Suffixes are matched
/// exactly after whitespace normalisation.
const UNITS: &[(&str, Dimension, f64)] = &[
    ("kg", Dimension::Mass, 1.0),
    ("g", Dimension::Mass, 1e-3),
    ("amu", Dimension::Mass, AMU_KG),
    ("u", Dimension::Mass, AMU_KG),
    ("Da", Dimension::Mass, AMU_KG),
    ("rad/s", Dimension::AngularFrequency, 1.0),
    ("s", Dimension::Time, 1.0),
    ("ms", Dimension::Time, 1e-3),
    ("us", Dimension::Time, 1e-6),
    ("ns", Dimension::Time, 1e-9),
    ("min", Dimension::Time, 60.0),
    ("h", Dimension::Time, 3600.0),
    ("d", Dimension::Time, 86_400.0),
    ("yr", Dimension::Time, YEAR_S),
    ("m", Dimension::Length, 1.0),
    ("cm", Dimension::Length, 1e-2),
    ("mm", Dimension::Length, 1e-3),
    ("um", Dimension::Length, 1e-6),
    ("nm", Dimension::Length, 1e-9),
    ("pm", Dimension::Length, 1e-12),
    ("m^-2 s^-1", Dimension::DiffusionRate, 1.0),
    ("m^-2/s", Dimension::DiffusionRate, 1.0),
    ("1/(m^2 s)", Dimension::DiffusionRate, 1.0),
    ("s^-1", Dimension::Rate, 1.0),
    ("1/s", Dimension::Rate, 1.0),
    ("dB", Dimension::Squeezing, 1.0),
    ("rad", Dimension::Angle, 1.0),
    ("deg", Dimension::Angle, PI / 180.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    /// In the canonical unit of `dimension`.
    pub value: f64,
    pub dimension: Dimension,
}

impl Quantity {
    pub fn new(value: f64, dimension: Dimension) -> Self {
        Self { value, dimension }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |why: &str| Error::Config(format!("cannot parse quantity {text:?}: {why}"));
        let split = text.find(char::is_whitespace).unwrap_or(text.len());
        let (number, unit) = text.split_at(split);
        let value: f64 = number.parse().map_err(|_| bad("leading number expected"))?;
        if !value.is_finite() {
            return Err(bad("value must be finite"));
        }
        let unit = unit.split_whitespace().collect::<Vec<_>>().join(" ");
        if unit.is_empty() {
            return Ok(Self::new(value, Dimension::Dimensionless));
        }
        let (_, dim, factor) = UNITS
            .iter()
            .find(|(suffix, _, _)| *suffix == unit)
            .ok_or_else(|| bad("unknown unit"))?;
        Ok(Self::new(value * factor, *dim))
    }

    /// Value in canonical units, checking the dimension.
    pub fn expect(&self, dimension: Dimension, field: &str) -> Result<f64> {
        if self.dimension != dimension {
            return Err(Error::Config(format!(
                "{field}: expected a {} (e.g. \"1 {}\"), got a {}",
                dimension.name(),
                dimension.canonical_unit(),
                self.dimension.name()
            )));
        }
        Ok(self.value)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:e}` prints the shortest digits that round-trip
        match self.dimension {
            Dimension::Dimensionless => write!(f, "{:e}", self.value),
            d => write!(f, "{:e} {}", self.value, d.canonical_unit()),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Float(f64),
            Int(i64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Float(v) => Ok(Quantity::new(v, Dimension::Dimensionless)),
            Repr::Int(v) => Ok(Quantity::new(v as f64, Dimension::Dimensionless)),
            Repr::Text(t) => Quantity::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}
