//! Mapping between the momentum-diffusion rate and the CSL collapse
//! parameters `(lambda_CSL, r_C)` for a homogeneous sphere.

use serde::{Deserialize, Serialize};

use crate::dynamics::AMU_KG;
use crate::error::{ensure, Error, Result};
use crate::fisher::PrecisionBound;

/// Below this `x` the shape factor is summed from its power series.
pub const SHAPE_SERIES_CROSSOVER: f64 = 1.0;

/// Geometry factor `f(x) = 6/x^4 [1 - 2/x^2 + (1 + 2/x^2) e^{-x^2}]`, with
/// `x = r_S / r_C`.
///
/// The bracket is `O(x^4)` built from `O(1)` terms, so the direct form loses
/// about `12 eps / x^6` relative accuracy; for `x <= 1` the series
/// `6 sum_{m>=2} (-1)^m (m-1)/(m+1)! x^{2(m-2)}` is used instead.
pub fn shape_factor_f(x: f64) -> Result<f64> {
    ensure(x.is_finite() && x > 0.0, || {
        format!("shape factor needs x > 0, got {x}")
    })?;
    Ok(if x <= SHAPE_SERIES_CROSSOVER {
        shape_factor_series(x)
    } else {
        shape_factor_direct(x)
    })
}

/// Closed form of [`shape_factor_f`], accurate for `x > 1`.
pub fn shape_factor_direct(x: f64) -> f64 {
    let y = x * x;
    6.0 / (y * y) * (1.0 - 2.0 / y + (1.0 + 2.0 / y) * (-y).exp())
}

/// Power series of [`shape_factor_f`], accurate for `x <= 1`.
pub fn shape_factor_series(x: f64) -> f64 {
    let y = x * x;
    // term_m = (-y)^{m-2} (m-1) / (m+1)!, starting at m = 2
    let mut sum = 0.0;
    let mut power_over_fact = 1.0 / 6.0; // (-y)^{m-2} / (m+1)!
    for m in 2..60u32 {
        let term = power_over_fact * f64::from(m - 1);
        sum += term;
        if term.abs() <= f64::EPSILON * 0.25 * sum.abs() {
            break;
        }
        power_over_fact *= -y / f64::from(m + 2);
    }
    6.0 * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslPoint {
    /// s^-1
    pub lambda_csl: f64,
    /// m
    pub r_c: f64,
}

impl CslPoint {
    pub fn new(lambda_csl: f64, r_c: f64) -> Result<Self> {
        ensure(lambda_csl.is_finite() && lambda_csl > 0.0, || {
            format!("collapse rate must be positive, got {lambda_csl}")
        })?;
        ensure(r_c.is_finite() && r_c > 0.0, || {
            format!("r_C must be positive, got {r_c}")
        })?;
        Ok(Self { lambda_csl, r_c })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    /// kg
    pub mass: f64,
    /// m
    pub radius: f64,
    /// kg, 1 amu unless overridden
    pub reference_mass: f64,
}

impl SphereSpec {
    pub fn new(mass: f64, radius: f64) -> Result<Self> {
        Self::with_reference_mass(mass, radius, AMU_KG)
    }

    pub fn with_reference_mass(mass: f64, radius: f64, reference_mass: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("radius", radius), ("reference mass", reference_mass)] {
            ensure(v.is_finite() && v > 0.0, || {
                format!("sphere {name} must be positive, got {v}")
            })?;
        }
        Ok(Self {
            mass,
            radius,
            reference_mass,
        })
    }

    /// `Lambda / lambda_CSL = (m/m0)^2 f(r_S/r_C) / (4 r_C^2)`, in m^-2.
    pub fn coupling(&self, r_c: f64) -> Result<f64> {
        ensure(r_c.is_finite() && r_c > 0.0, || {
            format!("r_C must be positive, got {r_c}")
        })?;
        let ratio = self.mass / self.reference_mass;
        Ok(ratio * ratio * shape_factor_f(self.radius / r_c)? / (4.0 * r_c * r_c))
    }
}

/// Diffusion rate (m^-2 s^-1) induced by CSL at `point`.
pub fn lambda_from_csl(point: &CslPoint, sphere: &SphereSpec) -> Result<f64> {
    Ok(point.lambda_csl * sphere.coupling(point.r_c)?)
}

/// Uncertainty on `lambda_CSL` (s^-1) implied by an uncertainty on the
/// diffusion rate.
pub fn delta_lambda_csl(delta_lambda: f64, r_c: f64, sphere: &SphereSpec) -> Result<f64> {
    ensure(delta_lambda.is_finite() && delta_lambda >= 0.0, || {
        format!("diffusion uncertainty must be >= 0, got {delta_lambda}")
    })?;
    Ok(delta_lambda / sphere.coupling(r_c)?)
}

/// Smallest collapse rate distinguishable from zero after `repetitions`
/// shots: `(2 / sqrt(nu)) lambda_0`, where `lambda_0` is the single-shot
/// uncertainty on `lambda_CSL` at vanishing diffusion. `bound_at_zero` must
/// be the scheme's bound evaluated at `lambda_tilde = 0`.
pub fn min_detectable_rate(
    bound_at_zero: &PrecisionBound,
    r_c: f64,
    sphere: &SphereSpec,
    repetitions: f64,
) -> Result<f64> {
    ensure(repetitions.is_finite() && repetitions >= 1.0, || {
        format!("repetitions must be >= 1, got {repetitions}")
    })?;
    let lambda_0 = delta_lambda_csl(bound_at_zero.variance_bound.sqrt(), r_c, sphere)?;
    Ok(2.0 / repetitions.sqrt() * lambda_0)
}

/// Parse a two-column `(r_C [m], lambda [s^-1])` overlay table. Blank lines
/// and lines starting with `#` are skipped; columns split on whitespace or
/// commas.
pub fn parse_overlay(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let bad = || Error::Config(format!("overlay line {}: expected two numbers, got {line:?}", i + 1));
        if cols.len() != 2 {
            return Err(bad());
        }
        let r_c: f64 = cols[0].parse().map_err(|_| bad())?;
        let lambda: f64 = cols[1].parse().map_err(|_| bad())?;
        if !(r_c.is_finite() && lambda.is_finite() && r_c > 0.0) {
            return Err(bad());
        }
        rows.push((r_c, lambda));
    }
    Ok(rows)
}
