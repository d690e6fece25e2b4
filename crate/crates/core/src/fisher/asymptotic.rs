//! Long-time approximations. These are kept apart from the exact bounds and
//! are only used to check them; nothing in the crate substitutes them.

/// Position-measurement bound for `tau >> 1`:
/// `2 [lambda_tilde + 3 T (cosh 2r - sinh 2r cos 2phi) / tau]^2`.
pub fn position_crb_large_tau(t: f64, r: f64, phi: f64, tau: f64, lambda_tilde: f64) -> f64 {
    let v = lambda_tilde + 3.0 * t * ((2.0 * r).cosh() - (2.0 * r).sinh() * (2.0 * phi).cos()) / tau;
    2.0 * v * v
}

/// QCRB for a pure input (`T = 1`) squeezed at the long-time optimal angle,
/// valid for `tau >> 1`. `r` may take either sign.
pub fn qcrb_large_tau_pure(r: f64, tau: f64, lambda_tilde: f64) -> f64 {
    let l = lambda_tilde;
    let e = (-2.0 * r).exp();
    let num = 8.0 * l * (e + tau * l / 4.0) * (1.0 + tau.powi(3) * e * l / 6.0 + tau.powi(4) * l * l / 24.0);
    let den = 2.0 * tau.powi(3) * e * e / 3.0 + tau.powi(4) * e * l / 3.0 + tau.powi(5) * l * l / 12.0;
    num / den
}
