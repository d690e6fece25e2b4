use std::f64::consts::FRAC_PI_2;

use crate::dynamics::SqueezedThermalSpec;
use crate::error::{ensure, Error, Result};

use super::{check_point, MeasurementScheme, PrecisionBound};

/// `(cos theta, sin theta)` with exact values on the position and momentum axes.
fn quadrature(theta: f64) -> (f64, f64) {
    if theta == 0.0 {
        (1.0, 0.0)
    } else if theta == FRAC_PI_2 {
        (0.0, 1.0)
    } else if theta == -FRAC_PI_2 {
        (0.0, -1.0)
    } else {
        let (s, c) = theta.sin_cos();
        (c, s)
    }
}

/// The measured quadrature pulled back to the release frame, `S^T u`.
fn release_frame_quadrature(theta: f64, tau: f64) -> [f64; 2] {
    let (c, s) = quadrature(theta);
    [c, c.mul_add(tau, s)]
}

/// `u^T sigma0 u` for the squeezed thermal input, as a sum of squares.
fn initial_quadrature_variance(spec: &SqueezedThermalSpec, w: [f64; 2]) -> f64 {
    let (sp, cp) = spec.angle().sin_cos();
    let along = w[0] * cp + w[1] * sp;
    let across = -w[0] * sp + w[1] * cp;
    let r2 = 2.0 * spec.squeezing();
    spec.thermal_variance() * (r2.exp() * along * along + (-r2).exp() * across * across)
}

/// `d Sigma / d lambda_tilde = tau^3 cos^2/3 + tau^2 sin(2theta)/2 + tau sin^2`,
/// written as a sum of squares so it cannot go negative by rounding.
pub fn homodyne_variance_slope(theta: f64, tau: f64) -> f64 {
    let w = release_frame_quadrature(theta, tau);
    let a = tau * w[0] - 1.5 * w[1];
    tau * (a * a / 3.0 + 0.25 * w[1] * w[1])
}

/// Variance of the homodyne outcome along `x cos(theta) + p sin(theta)` after
/// free expansion for `tau` with diffusion `lambda_tilde`.
pub fn homodyne_variance(theta: f64, spec: &SqueezedThermalSpec, tau: f64, lambda_tilde: f64) -> Result<f64> {
    check_point(tau, lambda_tilde, 1.0)?;
    ensure(theta.is_finite(), || {
        format!("homodyne angle must be finite, got {theta}")
    })?;
    let w = release_frame_quadrature(theta, tau);
    Ok(initial_quadrature_variance(spec, w) + lambda_tilde * homodyne_variance_slope(theta, tau))
}

/// Homodyne Cramér–Rao bound `2 [lambda_tilde + Sigma_0 / B]^2` where
/// `Sigma = Sigma_0 + lambda_tilde B`.
pub fn homodyne_crb(
    theta: f64,
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    check_point(tau, lambda_tilde, lambda_sql)?;
    ensure(theta.is_finite(), || {
        format!("homodyne angle must be finite, got {theta}")
    })?;
    let slope = homodyne_variance_slope(theta, tau);
    if !(slope > 0.0) {
        return Err(Error::Uninformative);
    }
    let w = release_frame_quadrature(theta, tau);
    let ratio = lambda_tilde + initial_quadrature_variance(spec, w) / slope;
    PrecisionBound::from_dimensionless(2.0 * ratio * ratio, lambda_sql, MeasurementScheme::homodyne(theta))
}

pub fn position_crb(
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    homodyne_crb(0.0, spec, tau, lambda_tilde, lambda_sql)
}

pub fn momentum_crb(
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    homodyne_crb(FRAC_PI_2, spec, tau, lambda_tilde, lambda_sql)
}

/// Squeezing angle that puts the squeezed axis on the measured (release-frame)
/// quadrature: `-arctan[1 / (tau + tan theta)]`.
pub fn optimal_homodyne_squeeze_angle(theta: f64, tau: f64) -> f64 {
    let w = release_frame_quadrature(theta, tau);
    if w[0] == 0.0 {
        return 0.0;
    }
    -(w[0] / w[1]).atan()
}

/// `(tau^2 cos^2 + tau sin 2theta + 1) / (tau^3 cos^2/3 + tau^2 sin 2theta/2 + tau sin^2)`:
/// the coefficient of `T e^{-2r}` in the homodyne bound when the squeezing
/// angle is matched to `theta`.
pub fn chi(tau: f64, theta: f64) -> Result<f64> {
    ensure(tau.is_finite() && tau >= 0.0, || format!("tau must be >= 0, got {tau}"))?;
    let slope = homodyne_variance_slope(theta, tau);
    if !(slope > 0.0) {
        return Err(Error::Uninformative);
    }
    let w = release_frame_quadrature(theta, tau);
    Ok((w[0] * w[0] + w[1] * w[1]) / slope)
}

fn root(tau: f64) -> f64 {
    (9.0 + 3.0 * tau * tau + tau.powi(4)).sqrt()
}

/// Homodyne angle minimising [`chi`]: `-arctan[(3 + 2tau^2 + sqrt(9 + 3tau^2 + tau^4)) / (3tau)]`.
pub fn optimal_homodyne_angle(tau: f64) -> Result<f64> {
    ensure(tau.is_finite() && tau > 0.0, || {
        format!("tau must be positive, got {tau}")
    })?;
    Ok(-((3.0 + 2.0 * tau * tau + root(tau)) / (3.0 * tau)).atan())
}

/// Minimum of [`chi`] over `theta`, `2 (3 + tau^2 - sqrt(9 + 3tau^2 + tau^4)) / tau^3`,
/// in a form free of cancellation.
pub fn optimal_homodyne_coefficient(tau: f64) -> Result<f64> {
    ensure(tau.is_finite() && tau > 0.0, || {
        format!("tau must be positive, got {tau}")
    })?;
    Ok(6.0 / (tau * (3.0 + tau * tau + root(tau))))
}

/// Bound for the optimal quadrature with the squeezing angle matched to it:
/// `2 [lambda_tilde + T e^{-2|r|} chi_min]^2`.
pub fn optimal_homodyne_crb(
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    check_point(tau, lambda_tilde, lambda_sql)?;
    if tau == 0.0 {
        return Err(Error::Uninformative);
    }
    let coef = optimal_homodyne_coefficient(tau)?;
    let v = lambda_tilde + spec.thermal_variance() * (-2.0 * spec.squeezing().abs()).exp() * coef;
    PrecisionBound::from_dimensionless(
        2.0 * v * v,
        lambda_sql,
        MeasurementScheme::homodyne(optimal_homodyne_angle(tau)?),
    )
}

/// Optimal homodyne quadrature when the input is squeezed along position or
/// momentum (`phi = 0`, sign of `r` free).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosMomOptimum {
    pub theta: f64,
    /// `Sigma_0 / (T B)` at `theta`; the bound is `2 [lambda_tilde + T coefficient]^2`.
    pub coefficient: f64,
}

impl PosMomOptimum {
    pub fn crb(&self, thermal_variance: f64, lambda_tilde: f64, lambda_sql: f64) -> Result<PrecisionBound> {
        let v = lambda_tilde + thermal_variance * self.coefficient;
        PrecisionBound::from_dimensionless(2.0 * v * v, lambda_sql, MeasurementScheme::homodyne(self.theta))
    }
}

pub fn posmom_squeezing_homodyne_optimum(r: f64, tau: f64) -> Result<PosMomOptimum> {
    ensure(tau.is_finite() && tau > 0.0, || {
        format!("tau must be positive, got {tau}")
    })?;
    ensure(r.is_finite(), || format!("squeezing must be finite, got {r}"))?;
    let (e2, em2) = ((2.0 * r).exp(), (-2.0 * r).exp());
    let t2 = tau * tau;
    let theta =
        -((3.0 * e2 * e2 + 2.0 * t2 + (9.0 * e2.powi(4) + 3.0 * e2 * e2 * t2 + t2 * t2).sqrt()) / (3.0 * tau)).atan();
    let coefficient = 6.0 / (tau * (3.0 * e2 + em2 * t2 + (9.0 * e2 * e2 + 3.0 * t2 + em2 * em2 * t2 * t2).sqrt()));
    Ok(PosMomOptimum { theta, coefficient })
}
