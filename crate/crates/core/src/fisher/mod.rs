//! Quantum and classical Fisher information for diffusion estimation, and the
//! Cramér–Rao bounds they imply for each measurement scheme.
//!
//! Bounds are computed dimensionlessly (per `lambda_tilde`) and carried in a
//! [`PrecisionBound`] together with their SI value, which is the dimensionless
//! bound times `Lambda_SQL^2`.

pub mod asymptotic;
mod heterodyne;
mod homodyne;
mod quantum;
mod ratios;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{CovMatrix2, SqueezedThermalSpec};
use crate::error::{ensure, Error, Result};

pub use heterodyne::{heterodyne_covariance, heterodyne_crb};
pub use homodyne::{
    chi, homodyne_crb, homodyne_variance, homodyne_variance_slope, momentum_crb, optimal_homodyne_angle,
    optimal_homodyne_coefficient, optimal_homodyne_crb, optimal_homodyne_squeeze_angle, position_crb,
    posmom_squeezing_homodyne_optimum, PosMomOptimum,
};
pub use quantum::{
    optimal_qcrb_squeeze_angle, qcrb_branch_angles, qcrb_branch_select, qcrb_closed_form, qfi_free_expansion,
    qfi_numeric, z_factor, SqueezeBranch, QFI_MAX_CONDITION,
};
pub use ratios::{ratio_het_hom, ratio_het_qfi, ratio_hom_qfi};

/// Which measurement is performed after the free expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasurementScheme {
    /// Quadrature `x cos(theta) + p sin(theta)`, `theta` in `(-pi/2, pi/2]`.
    Homodyne {
        theta: f64,
    },
    Heterodyne,
    /// Projection on the eigenbasis of the symmetric logarithmic derivative.
    SldOptimal,
}

impl MeasurementScheme {
    pub fn homodyne(theta: f64) -> Self {
        MeasurementScheme::Homodyne {
            theta: canonical_quadrature_angle(theta),
        }
    }

    pub fn position() -> Self {
        Self::homodyne(0.0)
    }

    pub fn momentum() -> Self {
        Self::homodyne(FRAC_PI_2)
    }
}

/// Reduce a homodyne angle to `(-pi/2, pi/2]`; `theta` and `theta + pi` measure
/// the same quadrature up to sign.
pub fn canonical_quadrature_angle(theta: f64) -> f64 {
    let mut a = (theta + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if a <= -FRAC_PI_2 {
        a += PI;
    }
    a
}

/// Single-shot variance bound on the diffusion rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionBound {
    /// (m^-2 s^-1)^2
    pub variance_bound: f64,
    /// Fisher information per shot, (m^-2 s^-1)^-2.
    pub fisher_info: f64,
    pub scheme: MeasurementScheme,
    /// `variance_bound / Lambda_SQL^2`.
    pub dimensionless_bound: f64,
}

impl PrecisionBound {
    pub fn from_dimensionless(dimensionless_bound: f64, lambda_sql: f64, scheme: MeasurementScheme) -> Result<Self> {
        if !(dimensionless_bound.is_finite() && dimensionless_bound > 0.0) {
            return Err(Error::Uninformative);
        }
        let variance_bound = dimensionless_bound * lambda_sql * lambda_sql;
        Ok(Self {
            variance_bound,
            fisher_info: 1.0 / variance_bound,
            scheme,
            dimensionless_bound,
        })
    }

    /// Fisher information per `lambda_tilde^2`.
    pub fn dimensionless_fisher_info(&self) -> f64 {
        1.0 / self.dimensionless_bound
    }

    /// Standard deviation after `repetitions` independent shots.
    pub fn std_dev(&self, repetitions: f64) -> f64 {
        (self.variance_bound / repetitions).sqrt()
    }
}

pub(crate) fn check_point(tau: f64, lambda_tilde: f64, lambda_sql: f64) -> Result<()> {
    ensure(tau.is_finite() && tau >= 0.0, || format!("tau must be >= 0, got {tau}"))?;
    ensure(lambda_tilde.is_finite() && lambda_tilde >= 0.0, || {
        format!("lambda_tilde must be >= 0, got {lambda_tilde}")
    })?;
    ensure(lambda_sql.is_finite() && lambda_sql > 0.0, || {
        format!("Lambda_SQL must be positive, got {lambda_sql}")
    })
}

/// Classical Fisher information of a zero-mean Gaussian with a 2×2
/// parameter-dependent covariance: `1/2 tr[(Sigma^-1 dSigma)^2]`.
pub fn gaussian_cfi(sigma: &CovMatrix2, dsigma: &CovMatrix2) -> Result<f64> {
    let det = sigma.det();
    if !(sigma.xx > 0.0 && det > 0.0) || !det.is_finite() {
        return Err(Error::SingularCovariance(format!(
            "covariance is not positive definite (det = {det:e})"
        )));
    }
    // X = Sigma^-1 dSigma, with Sigma^-1 = adj(Sigma) / det
    let x00 = (sigma.pp * dsigma.xx - sigma.xp * dsigma.xp) / det;
    let x01 = (sigma.pp * dsigma.xp - sigma.xp * dsigma.pp) / det;
    let x10 = (sigma.xx * dsigma.xp - sigma.xp * dsigma.xx) / det;
    let x11 = (sigma.xx * dsigma.pp - sigma.xp * dsigma.xp) / det;
    Ok(0.5 * (x00 * x00 + 2.0 * x01 * x10 + x11 * x11))
}

/// Scalar case of [`gaussian_cfi`]: `dSigma^2 / (2 Sigma^2)`.
pub fn gaussian_cfi_1d(variance: f64, dvariance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::SingularCovariance(format!(
            "variance must be positive, got {variance:e}"
        )));
    }
    let q = dvariance / variance;
    Ok(0.5 * q * q)
}

/// Bound for any [`MeasurementScheme`]. The SLD-optimal measurement saturates
/// the quantum Cramér–Rao bound.
pub fn bound_for(
    scheme: MeasurementScheme,
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    match scheme {
        MeasurementScheme::Homodyne { theta } => homodyne_crb(theta, spec, tau, lambda_tilde, lambda_sql),
        MeasurementScheme::Heterodyne => heterodyne_crb(spec, tau, lambda_tilde, lambda_sql),
        MeasurementScheme::SldOptimal => qcrb_closed_form(spec, tau, lambda_tilde, lambda_sql),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quadrature_angle_chart() {
        assert_eq!(canonical_quadrature_angle(FRAC_PI_2), FRAC_PI_2);
        assert_relative_eq!(canonical_quadrature_angle(-FRAC_PI_2), FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(canonical_quadrature_angle(PI + 0.2), 0.2, epsilon = 1e-15);
        assert_relative_eq!(canonical_quadrature_angle(-1.2), -1.2, epsilon = 1e-15);
        assert_relative_eq!(canonical_quadrature_angle(2.0), 2.0 - PI, epsilon = 1e-15);
    }

    #[test]
    fn cfi_examples() {
        assert_relative_eq!(gaussian_cfi_1d(2.0, 1.0).unwrap(), 0.125);
        assert_relative_eq!(gaussian_cfi(&CovMatrix2::IDENTITY, &CovMatrix2::IDENTITY).unwrap(), 1.0);
        assert!(gaussian_cfi_1d(0.0, 1.0).is_err());
        assert!(gaussian_cfi(&CovMatrix2::new(1.0, 1.0, 1.0), &CovMatrix2::IDENTITY).is_err());
    }

    #[test]
    fn cfi_matrix_reduces_to_scalar_for_diagonal_blocks() {
        let s = CovMatrix2::diag(2.0, 5.0);
        let d = CovMatrix2::diag(1.0, 0.0);
        assert_relative_eq!(gaussian_cfi(&s, &d).unwrap(), gaussian_cfi_1d(2.0, 1.0).unwrap());
    }

    #[test]
    fn bound_reports_si_and_dimensionless_values() {
        let b = PrecisionBound::from_dimensionless(2.0, 1e3, MeasurementScheme::Heterodyne).unwrap();
        assert_eq!(b.variance_bound, 2e6);
        assert_eq!(b.fisher_info, 0.5e-6);
        assert_eq!(b.dimensionless_fisher_info(), 0.5);
        assert_relative_eq!(b.std_dev(4.0), (0.5e6f64).sqrt());
        assert!(PrecisionBound::from_dimensionless(f64::INFINITY, 1.0, MeasurementScheme::Heterodyne).is_err());
    }
}
