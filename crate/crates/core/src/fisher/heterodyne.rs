use crate::dynamics::{CovMatrix2, SqueezedThermalSpec};
use crate::error::{Error, Result};

use super::{check_point, MeasurementScheme, PrecisionBound};

/// Covariance of the heterodyne outcomes (Husimi Q-function): `sigma + I`.
pub fn heterodyne_covariance(sigma_tau: &CovMatrix2) -> CovMatrix2 {
    *sigma_tau + CovMatrix2::IDENTITY
}

/// `v^T sigma0 v` for a squeezed thermal input with squeezing `r`, summed as
/// squares in the squeezing frame.
fn squeezed_form(t: f64, r: f64, phi: f64, v: [f64; 2]) -> f64 {
    let (sp, cp) = phi.sin_cos();
    let along = v[0] * cp + v[1] * sp;
    let across = -v[0] * sp + v[1] * cp;
    t * ((2.0 * r).exp() * along * along + (-2.0 * r).exp() * across * across)
}

/// Heterodyne Cramér–Rao bound.
///
/// With `|Sigma(lambda_tilde)| = a0 + a1 lambda_tilde + a2 lambda_tilde^2` the
/// Fisher information `1/2 tr[(Sigma^-1 dSigma)^2]` reduces to
/// `(a1^2 - 2 a0 a2 + 2 a2 lambda_tilde (a1 + a2 lambda_tilde)) / (2 |Sigma|^2)`.
/// Every `a_i` is assembled from positive pieces, which keeps the result
/// accurate where the laboratory-frame entries of `sigma(tau)` cancel.
pub fn heterodyne_crb(
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    check_point(tau, lambda_tilde, lambda_sql)?;
    if tau == 0.0 {
        return Err(Error::Uninformative);
    }
    let (t, r, phi) = (spec.thermal_variance(), spec.squeezing(), spec.angle());
    let form = |v| squeezed_form(t, r, phi, v);
    let adj_form = |v| squeezed_form(t, -r, phi, v);

    // tr(adj(sigma0) K) with K = tau (v v^T + tau^2/12 e1 e1^T), v = (-tau/2, 1)
    let cross = tau * (adj_form([-0.5 * tau, 1.0]) + tau * tau / 12.0 * adj_form([1.0, 0.0]));
    let trace0 = form([1.0, tau]) + form([0.0, 1.0]);
    let a2 = tau.powi(4) / 12.0;
    let a1 = cross + tau * tau * tau / 3.0 + tau;
    let a0 = t * t + trace0 + 1.0;
    let l = lambda_tilde;
    let det = a0 + l * (a1 + a2 * l);
    let num = a1 * a1 - 2.0 * a0 * a2 + 2.0 * a2 * l * (a1 + a2 * l);
    if !(num > 0.0) {
        return Err(Error::Uninformative);
    }
    PrecisionBound::from_dimensionless(2.0 * det * det / num, lambda_sql, MeasurementScheme::Heterodyne)
}
