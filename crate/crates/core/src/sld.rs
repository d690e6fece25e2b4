//! Symmetric logarithmic derivative of the freely expanded state, and the
//! rotation plus squeezing that turns its quadratic part into a number
//! operator (so that phonon counting becomes the optimal measurement).

use std::f64::consts::LN_10;

use serde::Serialize;

use crate::dynamics::{CovMatrix2, FreeExpansion};
use crate::error::{ensure, Error, Result};

/// `L = x^T l2 x + constant_offset`, per unit `lambda_tilde`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SldQuadraticForm {
    pub l2: CovMatrix2,
    /// `-1/2 tr(l2 sigma)`.
    pub constant_offset: f64,
    /// `l2 (|sigma|^2 - 1)`.
    unscaled: CovMatrix2,
    det: f64,
}

impl SldQuadraticForm {
    /// Unscaled matrix `l2 (|sigma|^2 - 1)`.
    pub fn unscaled(&self) -> CovMatrix2 {
        self.unscaled
    }

    /// `|sigma(tau)|` used for the scaling.
    pub fn determinant(&self) -> f64 {
        self.det
    }

    /// SLD for a free expansion, with the determinant taken from the release
    /// frame.
    pub fn for_expansion(expansion: &FreeExpansion) -> Result<Self> {
        build(&expansion.covariance(), expansion.tau, expansion.determinant())
    }

    /// `1/2 tr(dsigma l2)`: the QFI carried by this SLD.
    pub fn information(&self, dsigma: &CovMatrix2) -> f64 {
        0.5 * (dsigma.xx * self.l2.xx + 2.0 * dsigma.xp * self.l2.xp + dsigma.pp * self.l2.pp)
    }
}

/// Closed-form solution of `sigma L sigma + Omega L Omega = d sigma / d lambda_tilde`
/// for the evolved covariance `sigma_tau`.
pub fn l2_matrix(sigma_tau: &CovMatrix2, tau: f64) -> Result<SldQuadraticForm> {
    build(sigma_tau, tau, sigma_tau.det())
}

fn build(s: &CovMatrix2, tau: f64, det: f64) -> Result<SldQuadraticForm> {
    ensure(tau.is_finite() && tau >= 0.0, || format!("tau must be >= 0, got {tau}"))?;
    ensure(s.is_finite() && s.xx > 0.0 && s.pp > 0.0, || {
        format!("covariance must be positive definite, got {s:?}")
    })?;
    let excess = det - 1.0;
    if !(excess > 1e-12 * det) {
        return Err(Error::PureStateSingular { det });
    }
    let scale = excess * (det + 1.0);
    let (t2, t3) = (tau * tau, tau * tau * tau);
    let unscaled = CovMatrix2::new(
        tau + tau * s.xp * s.xp - t2 * s.xp * s.pp + t3 * s.pp * s.pp / 3.0,
        -tau * s.xx * s.xp + 0.5 * t2 * (s.xx * s.pp + s.xp * s.xp - 1.0) - t3 / 3.0 * s.xp * s.pp,
        tau * s.xx * s.xx - t2 * s.xx * s.xp + t3 / 3.0 * (1.0 + s.xp * s.xp),
    );
    let l2 = (1.0 / scale) * unscaled;
    let constant_offset = -0.5 * (l2.xx * s.xx + 2.0 * l2.xp * s.xp + l2.pp * s.pp);
    Ok(SldQuadraticForm {
        l2,
        constant_offset,
        unscaled,
        det,
    })
}

/// Spectral and Williamson data of `l2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SldDecomposition {
    /// Eigenvalues of `l2`, largest first.
    pub eigenvalues: [f64; 2],
    /// Rotation taking the first eigenvector onto the `x` axis.
    pub rotation_angle: f64,
    /// Squeezing (e-folds) that equalises the rotated diagonal.
    pub required_squeezing: f64,
    pub symplectic_eigenvalue: f64,
}

impl SldDecomposition {
    /// `e^{2z}`.
    pub fn squeezing_factor(&self) -> f64 {
        (2.0 * self.required_squeezing).exp()
    }

    /// `Z R(psi)^T l2 R(psi) Z` with `Z = diag(e^{-z}, e^{z})`; proportional to
    /// the identity when the decomposition is right.
    pub fn normal_form(&self, form: &SldQuadraticForm) -> CovMatrix2 {
        let (s, c) = self.rotation_angle.sin_cos();
        let z = self.required_squeezing;
        let a = [[c * (-z).exp(), s * (-z).exp()], [-s * z.exp(), c * z.exp()]];
        form.l2.congruence(a)
    }
}

/// `alpha = (l_xx + l_pp)/2` of the unscaled matrix.
fn alpha(s: &CovMatrix2, tau: f64) -> f64 {
    let t2 = tau * tau;
    0.5 * tau
        * (1.0 + s.xx * s.xx - tau * s.xp * (s.xx + s.pp)
            + t2 / 3.0 * (1.0 + s.pp * s.pp)
            + s.xp * s.xp * (1.0 + t2 / 3.0))
}

/// Eigen-decomposition of the SLD quadratic form from the closed-form
/// `alpha ± sqrt(alpha^2 - det)` expression.
pub fn sld_spectrum(form: &SldQuadraticForm, sigma_tau: &CovMatrix2, tau: f64) -> Result<SldDecomposition> {
    let s = sigma_tau;
    let det = form.det;
    let scale = (det - 1.0) * (det + 1.0);
    let a = alpha(s, tau);
    let m = s.xx - tau * s.xp + tau * tau * s.pp / 3.0;
    let q = tau * tau * m * m + tau.powi(4) / 12.0 * (det - 1.0) * (det - 1.0);
    let disc = (a * a - q).max(0.0).sqrt();
    let big = a + disc;
    if !(big > 0.0 && q > 0.0) {
        return Err(Error::Uninformative);
    }
    let small = q / big;
    let u = form.unscaled;
    let (rotation_angle, required_squeezing) = if disc == 0.0 {
        (0.0, 0.0)
    } else {
        (0.5 * (2.0 * u.xp).atan2(u.xx - u.pp), 0.25 * (big / small).ln())
    };
    Ok(SldDecomposition {
        eigenvalues: [big / scale, small / scale],
        rotation_angle,
        required_squeezing,
        symplectic_eigenvalue: q.sqrt() / scale,
    })
}

/// `10 log10(e^{2z})`.
pub fn required_squeezing_db(decomp: &SldDecomposition) -> f64 {
    20.0 * decomp.required_squeezing / LN_10
}
