//! TOML run configuration. Every physical quantity is a unit-suffixed string
//! (see [`super::units`]); `--set path=value` overrides are applied to the
//! parsed TOML tree before it is deserialised.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::units::{Dimension, Quantity};
use crate::dynamics::{db_to_squeezing, Scenario};
use crate::error::{Error, Result};
use crate::fisher::canonical_quadrature_angle;
use crate::montecarlo::DEFAULT_CHUNK_SIZE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_schemes")]
    pub schemes: Vec<SchemeChoice>,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub state: StateConfig,
    #[serde(default)]
    pub repetitions: RepetitionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csl: Option<CslConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloConfig>,
}

fn default_schemes() -> Vec<SchemeChoice> {
    vec![
        SchemeChoice::Qcrb,
        SchemeChoice::OptimalHomodyne,
        SchemeChoice::Momentum,
        SchemeChoice::Position,
        SchemeChoice::Heterodyne,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mass: Quantity,
    pub omega: Quantity,
    pub free_fall_time: Quantity,
    #[serde(default = "zero_rate")]
    pub lambda: Quantity,
    #[serde(default = "default_radius")]
    pub sphere_radius: Quantity,
    /// Use the MAQRO table's quoted `tau` and `Lambda_SQL` instead of the
    /// values derived from mass, frequency and time.
    #[serde(default)]
    pub table1_literal: bool,
}

fn zero_rate() -> Quantity {
    Quantity::new(0.0, Dimension::DiffusionRate)
}

fn default_radius() -> Quantity {
    Quantity::new(1e-7, Dimension::Length)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    #[serde(default = "unit")]
    pub thermal_variance: f64,
    #[serde(default = "zero_db")]
    pub squeezing: Quantity,
    #[serde(default)]
    pub squeezing_angle: AnglePolicy,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            thermal_variance: 1.0,
            squeezing: zero_db(),
            squeezing_angle: AnglePolicy::default(),
        }
    }
}

fn unit() -> f64 {
    1.0
}

fn zero_db() -> Quantity {
    Quantity::new(0.0, Dimension::Squeezing)
}

/// Squeezing angle for the schemes that do not optimise it themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnglePolicy {
    Fixed(f64),
    /// Matched to the measured quadrature (homodyne) or numerically minimised
    /// (heterodyne).
    Auto,
}

impl Default for AnglePolicy {
    fn default() -> Self {
        AnglePolicy::Fixed(0.0)
    }
}

impl fmt::Display for AnglePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnglePolicy::Auto => f.write_str("auto"),
            AnglePolicy::Fixed(a) => Quantity::new(*a, Dimension::Angle).fmt(f),
        }
    }
}

impl FromStr for AnglePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(AnglePolicy::Auto);
        }
        Ok(AnglePolicy::Fixed(
            Quantity::parse(s)?.expect(Dimension::Angle, "squeezing_angle")?,
        ))
    }
}

/// Measurement whose bound is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeChoice {
    Position,
    Momentum,
    /// Quadrature angle in rad.
    Homodyne(f64),
    OptimalHomodyne,
    Heterodyne,
    /// Quantum Cramér–Rao bound with the squeezing angle optimised.
    Qcrb,
}

impl SchemeChoice {
    pub fn is_quadrature(&self) -> bool {
        matches!(
            self,
            SchemeChoice::Position | SchemeChoice::Momentum | SchemeChoice::Homodyne(_) | SchemeChoice::OptimalHomodyne
        )
    }
}

impl fmt::Display for SchemeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeChoice::Position => f.write_str("position"),
            SchemeChoice::Momentum => f.write_str("momentum"),
            SchemeChoice::Homodyne(theta) => write!(f, "homodyne:{theta:e}"),
            SchemeChoice::OptimalHomodyne => f.write_str("optimal-homodyne"),
            SchemeChoice::Heterodyne => f.write_str("heterodyne"),
            SchemeChoice::Qcrb => f.write_str("qcrb"),
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "position" => SchemeChoice::Position,
            "momentum" => SchemeChoice::Momentum,
            "optimal-homodyne" => SchemeChoice::OptimalHomodyne,
            "heterodyne" => SchemeChoice::Heterodyne,
            "qcrb" => SchemeChoice::Qcrb,
            other => match other.strip_prefix("homodyne:") {
                Some(angle) => {
                    let q = Quantity::parse(angle)?;
                    let theta = match q.dimension {
                        Dimension::Dimensionless => q.value,
                        _ => q.expect(Dimension::Angle, "homodyne angle")?,
                    };
                    SchemeChoice::Homodyne(canonical_quadrature_angle(theta))
                }
                None => {
                    return Err(Error::Config(format!(
                        "unknown scheme {other:?}; expected position, momentum, optimal-homodyne, \
                         heterodyne, qcrb or homodyne:<angle>"
                    )))
                }
            },
        })
    }
}

macro_rules! serde_via_str {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(AnglePolicy);
serde_via_str!(SchemeChoice);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepetitionConfig {
    /// Explicit `nu`; overrides the campaign computation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<f64>,
    #[serde(default = "three_years")]
    pub campaign: Quantity,
    #[serde(default = "unit")]
    pub duty_cycle: f64,
}

impl Default for RepetitionConfig {
    fn default() -> Self {
        Self {
            count: None,
            campaign: three_years(),
            duty_cycle: 1.0,
        }
    }
}

fn three_years() -> Quantity {
    Quantity::new(3.0 * 365.25 * 86_400.0, Dimension::Time)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Diffusion rate, m^-2 s^-1.
    Lambda,
    /// Dimensionless expansion time `omega t`.
    Tau,
    /// Squeezing in dB.
    Squeezing,
    /// CSL length scale; rows report the minimum detectable collapse rate.
    RC,
}

impl SweepVariable {
    pub fn dimension(self) -> Dimension {
        match self {
            SweepVariable::Lambda => Dimension::DiffusionRate,
            SweepVariable::Tau => Dimension::Dimensionless,
            SweepVariable::Squeezing => Dimension::Squeezing,
            SweepVariable::RC => Dimension::Length,
        }
    }

    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::Lambda => "lambda[m^-2 s^-1]",
            SweepVariable::Tau => "tau",
            SweepVariable::Squeezing => "squeezing[dB]",
            SweepVariable::RC => "r_c[m]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    pub from: Quantity,
    pub to: Quantity,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Each scheme is evaluated at every listed squeezing; defaults to
    /// `state.squeezing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub squeezing_levels: Option<Vec<Quantity>>,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let dim = self.variable.dimension();
        let a = self.from.expect(dim, "sweep.from")?;
        let b = self.to.expect(dim, "sweep.to")?;
        if self.points < 2 {
            return Err(Error::Config(format!(
                "sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        let n = self.points - 1;
        let lerp = |x: f64, y: f64, k: usize| x + (y - x) * (k as f64 / n as f64);
        let mut grid: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..=n).map(|k| lerp(a, b, k)).collect(),
            Spacing::Log => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(Error::Config("log sweep bounds must be positive".into()));
                }
                (0..=n).map(|k| 10f64.powf(lerp(a.log10(), b.log10(), k))).collect()
            }
        };
        grid[0] = a;
        grid[n] = b;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CslConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_mass: Option<Quantity>,
    /// Two-column `(r_C [m], lambda [s^-1])` file interpolated onto the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub scheme: SchemeChoice,
    /// Diffusion rate with units, or a bare number read as `lambda_tilde`.
    pub true_lambda: Quantity,
    pub samples: usize,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_chunk")]
    pub chunk_size: usize,
}

fn default_chunk() -> usize {
    DEFAULT_CHUNK_SIZE
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let config: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Parse `text` after applying `key.path=value` overrides. Values are read
    /// as TOML when possible and as bare strings otherwise.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for item in overrides {
            let (path, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            let value = format!("v = {raw}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
            set_path(&mut table, path.trim(), value)?;
        }
        Self::from_table(table)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        self.repetitions()?;
        self.squeezing()?;
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if let Some(sweep) = &self.sweep {
            sweep.grid()?;
            for q in sweep.squeezing_levels.iter().flatten() {
                q.expect(Dimension::Squeezing, "sweep.squeezing_levels")?;
            }
        }
        if let Some(csl) = &self.csl {
            if let Some(m) = &csl.reference_mass {
                let m = m.expect(Dimension::Mass, "csl.reference_mass")?;
                if !(m > 0.0) {
                    return Err(Error::Config("csl.reference_mass must be positive".into()));
                }
            }
        }
        if let Some(mc) = &self.montecarlo {
            if mc.true_lambda.dimension != Dimension::Dimensionless {
                mc.true_lambda
                    .expect(Dimension::DiffusionRate, "montecarlo.true_lambda")?;
            }
            if mc.seed.is_some_and(|s| s > i64::MAX as u64) {
                return Err(Error::Config(format!("montecarlo.seed must be <= {}", i64::MAX)));
            }
            if mc.samples < 2 || mc.replicates < 2 || mc.chunk_size < 1 {
                return Err(Error::Config(
                    "montecarlo needs samples >= 2, replicates >= 2 and chunk_size >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// Physical scenario, with the table's literal values substituted when
    /// `table1_literal` is set.
    pub fn scenario(&self) -> Result<Scenario> {
        let s = &self.scenario;
        let scenario = Scenario::derive(
            s.mass.expect(Dimension::Mass, "scenario.mass")?,
            s.omega.expect(Dimension::AngularFrequency, "scenario.omega")?,
            s.free_fall_time.expect(Dimension::Time, "scenario.free_fall_time")?,
            s.lambda.expect(Dimension::DiffusionRate, "scenario.lambda")?,
            s.sphere_radius.expect(Dimension::Length, "scenario.sphere_radius")?,
            1.0,
        )
        .map_err(to_config)?;
        let mut scenario = if s.table1_literal {
            scenario.with_table1_literals()
        } else {
            scenario
        };
        scenario.repetitions = self.repetitions()?;
        Ok(scenario)
    }

    /// `nu`: the explicit count, or `floor(campaign duty / t)`.
    pub fn repetitions(&self) -> Result<f64> {
        let r = &self.repetitions;
        let nu = match r.count {
            Some(n) => n,
            None => {
                if !(r.duty_cycle > 0.0 && r.duty_cycle <= 1.0) {
                    return Err(Error::Config(format!(
                        "duty_cycle must be in (0, 1], got {}",
                        r.duty_cycle
                    )));
                }
                let campaign = r.campaign.expect(Dimension::Time, "repetitions.campaign")?;
                let t = self
                    .scenario
                    .free_fall_time
                    .expect(Dimension::Time, "scenario.free_fall_time")?;
                (campaign * r.duty_cycle / t).floor()
            }
        };
        if !(nu.is_finite() && nu >= 1.0) {
            return Err(Error::Config(format!("repetitions must be >= 1, got {nu}")));
        }
        Ok(nu)
    }

    /// Squeezing `r` in e-folds.
    pub fn squeezing(&self) -> Result<f64> {
        let t = self.state.thermal_variance;
        if !(t.is_finite() && t >= 1.0) {
            return Err(Error::Config(format!("state.thermal_variance must be >= 1, got {t}")));
        }
        Ok(db_to_squeezing(
            self.state.squeezing.expect(Dimension::Squeezing, "state.squeezing")?,
        ))
    }

    /// Squeezing levels of a sweep, in e-folds.
    pub fn squeezing_levels(&self) -> Result<Vec<f64>> {
        match self.sweep.as_ref().and_then(|s| s.squeezing_levels.as_ref()) {
            Some(levels) => levels
                .iter()
                .map(|q| {
                    Ok(db_to_squeezing(
                        q.expect(Dimension::Squeezing, "sweep.squeezing_levels")?,
                    ))
                })
                .collect(),
            None => Ok(vec![self.squeezing()?]),
        }
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    }
}

fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<()> {
    let mut keys = path.split('.').peekable();
    let mut cur = table;
    while let Some(key) = keys.next() {
        if key.is_empty() {
            return Err(Error::Config(format!("bad override path {path:?}")));
        }
        if keys.peek().is_none() {
            cur.insert(key.to_string(), value);
            return Ok(());
        }
        let next = cur
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = next
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override path {path:?} crosses a non-table")))?;
    }
    Ok(())
}
