use crate::dynamics::{CovMatrix2, FreeExpansion, SqueezedThermalSpec, SYMPLECTIC_FORM};
use crate::error::{ensure, Error, Result};
use crate::linalg::{condition_1, kron2, vec2, Lu4};

use super::{check_point, MeasurementScheme, PrecisionBound};

/// Condition numbers above this make [`qfi_numeric`] refuse to answer.
pub const QFI_MAX_CONDITION: f64 = 1e12;

/// `det sigma - 1` below this (relative) is treated as a pure state.
const PURE_STATE_TOL: f64 = 1e-12;

/// Gaussian QFI `1/2 vec(dS)^T (S⊗S − Ω⊗Ω)^{-1} vec(dS)` for a state with
/// parameter-independent first moments, via an explicit 4×4 solve.
///
/// The pair is first congruence-transformed by the symplectic scaling
/// `diag(s, 1/s)` that equalises the diagonal of `sigma`. The QFI is invariant
/// under that map and the balanced system is far better conditioned.
pub fn qfi_numeric(sigma: &CovMatrix2, dsigma: &CovMatrix2) -> Result<f64> {
    ensure(sigma.is_finite() && dsigma.is_finite(), || {
        "non-finite covariance".to_string()
    })?;
    ensure(sigma.xx > 0.0 && sigma.pp > 0.0, || {
        format!("covariance diagonal must be positive, got {sigma:?}")
    })?;
    let det = sigma.det();
    if det - 1.0 <= PURE_STATE_TOL * det.max(1.0) {
        if det < 1.0 - 1e-9 {
            return Err(Error::InvalidInput(format!("unphysical covariance: det = {det} < 1")));
        }
        return Err(Error::PureStateSingular { det });
    }

    let s = (sigma.pp / sigma.xx).sqrt().sqrt();
    let balance = [[s, 0.0], [0.0, 1.0 / s]];
    let sb = sigma.congruence(balance).to_array();
    let db = dsigma.congruence(balance).to_array();

    let ss = kron2(&sb, &sb);
    let oo = kron2(&SYMPLECTIC_FORM, &SYMPLECTIC_FORM);
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = ss[i][j] - oo[i][j];
        }
    }
    let lu = Lu4::factor(&m).ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
    let cond = condition_1(&m, &lu);
    if !(cond <= QFI_MAX_CONDITION) {
        return Err(Error::IllConditioned { cond });
    }
    let v = vec2(&db);
    let x = lu.solve(&v);
    Ok(0.5 * v.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
}

/// QFI (per `lambda_tilde^2`) of a freely expanded state, evaluated in the
/// release frame where the covariance entries carry no shear cancellation.
pub fn qfi_free_expansion(expansion: &FreeExpansion) -> Result<f64> {
    qfi_numeric(
        &expansion.release_frame_covariance(),
        &expansion.release_frame_derivative(),
    )
}

/// `Z = (1 + tau^2/3) cosh 2r + [(1 − tau^2/3) cos 2phi + tau sin 2phi] sinh 2r`.
pub fn z_factor(spec: &SqueezedThermalSpec, tau: f64) -> f64 {
    let r2 = 2.0 * spec.squeezing();
    let (s2p, c2p) = (2.0 * spec.angle()).sin_cos();
    (1.0 + tau * tau / 3.0) * r2.cosh() + ((1.0 - tau * tau / 3.0) * c2p + tau * s2p) * r2.sinh()
}

/// Closed-form quantum Cramér–Rao bound for a squeezed thermal input.
pub fn qcrb_closed_form(
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    lambda_sql: f64,
) -> Result<PrecisionBound> {
    check_point(tau, lambda_tilde, lambda_sql)?;
    let t = spec.thermal_variance();
    if t == 1.0 && lambda_tilde == 0.0 {
        return Err(Error::DegeneratePureState);
    }
    if tau == 0.0 {
        return Err(Error::Uninformative);
    }
    let z = z_factor(spec, tau);
    let t2m1 = (t - 1.0) * (t + 1.0);
    let drift = tau * t * lambda_tilde * z + tau.powi(4) * lambda_tilde * lambda_tilde / 12.0;
    // numerator (a^2 − 1) with a = T^2 + drift, kept exact near a = 1
    let excess = t2m1 + drift;
    let num = excess * (excess + 2.0);
    let den = tau.powi(4) / 12.0 * (drift - t2m1) + 0.5 * tau * tau * t * t * z * z;
    if !(den > 0.0) {
        return Err(Error::Uninformative);
    }
    PrecisionBound::from_dimensionless(num / den, lambda_sql, MeasurementScheme::SldOptimal)
}

/// Squeezing angle minimising the QCRB for `r > 0` in the long-time regime:
/// `arctan[(−3 + tau^2 − sqrt(9 + 3tau^2 + tau^4)) / (3 tau)]`.
pub fn optimal_qcrb_squeeze_angle(tau: f64) -> Result<f64> {
    ensure(tau.is_finite() && tau > 0.0, || {
        format!("tau must be positive, got {tau}")
    })?;
    let root = (9.0 + 3.0 * tau * tau + tau.powi(4)).sqrt();
    // (tau^2 − 3 − root)/(3 tau) rewritten as −3 tau / (tau^2 − 3 + root)
    Ok((-3.0 * tau / (tau * tau - 3.0 + root)).atan())
}

/// The two stationary angles `(phi_plus, phi_minus)` of `Z(phi)`.
pub fn qcrb_branch_angles(tau: f64) -> Result<(f64, f64)> {
    ensure(tau.is_finite() && tau > 0.0, || {
        format!("tau must be positive, got {tau}")
    })?;
    let root = (9.0 + 3.0 * tau * tau + tau.powi(4)).sqrt();
    let plus = ((tau * tau - 3.0 + root) / (3.0 * tau)).atan();
    Ok((plus, optimal_qcrb_squeeze_angle(tau)?))
}

/// Outcome of choosing between the two stationary squeezing angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeBranch {
    /// Angle to squeeze at with magnitude `|r|`.
    pub angle: f64,
    /// `true` when `phi_plus` won.
    pub plus: bool,
}

impl SqueezeBranch {
    /// Sign to give `|r|` on the `phi_plus` chart: `(phi_minus, |r|)` is the
    /// same state as `(phi_plus, −|r|)`.
    pub fn r_sign(&self) -> f64 {
        if self.plus {
            1.0
        } else {
            -1.0
        }
    }

    pub fn apply(&self, spec: &SqueezedThermalSpec) -> SqueezedThermalSpec {
        spec.with_squeezing(spec.squeezing().abs()).with_angle(self.angle)
    }
}

/// Pick the squeezing angle that minimises the QCRB at fixed `|r|`.
pub fn qcrb_branch_select(spec: &SqueezedThermalSpec, tau: f64, lambda_tilde: f64) -> Result<SqueezeBranch> {
    ensure(lambda_tilde.is_finite() && lambda_tilde >= 0.0, || {
        format!("lambda_tilde must be >= 0, got {lambda_tilde}")
    })?;
    let (phi_plus, phi_minus) = qcrb_branch_angles(tau)?;
    let t = spec.thermal_variance();
    let r = spec.squeezing().abs();
    let l = lambda_tilde;
    let g = l * l * tau.powi(4) / 12.0;
    let t2 = t * t;
    let t4 = t2 * t2;
    let tau2 = tau * tau;
    let lhs = l
        * tau
        * (-t4 * (1.0 + 0.75 * tau2 + tau2 * tau2 / 9.0)
            + tau2 / 12.0 * (1.0 + g) * (1.0 + g)
            + t2 * tau2 / 6.0 * (1.0 - g))
        + t * (1.0 + tau2 / 3.0) * ((1.0 - t2) * (1.0 + t2) + 2.0 * g * (1.0 - 2.0 * t2) + g * g) * (2.0 * r).cosh()
        - tau.powi(3) / 6.0 * t4 * l * (4.0 * r).cosh();
    let plus = lhs < 0.0;
    Ok(SqueezeBranch {
        angle: if plus { phi_plus } else { phi_minus },
        plus,
    })
}
