//! Single-mode Gaussian states under free evolution with momentum diffusion.
//!
//! Everything here is dimensionless: quadratures are scaled so the ground
//! state has the identity covariance, time is `tau = omega t`, and the
//! diffusion rate is `lambda_tilde = Lambda / Lambda_SQL`. SI quantities enter
//! only through [`Scenario`].

use std::f64::consts::{LN_10, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Reduced Planck constant (CODATA 2018), J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit (CODATA 2018), kg.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;

/// Commutator matrix of `(x, p)`: `[x_i, x_j] = i Omega_ij`.
pub const SYMPLECTIC_FORM: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

/// Symmetric 2×2 covariance of the dimensionless `(x, p)` quadratures.
///
/// Only the three independent entries are stored. The type is also used for
/// parameter derivatives of covariances, so physicality (`det >= 1`) is a
/// query, not a construction invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovMatrix2 {
    pub xx: f64,
    pub xp: f64,
    pub pp: f64,
}

impl CovMatrix2 {
    pub const IDENTITY: CovMatrix2 = CovMatrix2 {
        xx: 1.0,
        xp: 0.0,
        pp: 1.0,
    };
    pub const ZERO: CovMatrix2 = CovMatrix2 {
        xx: 0.0,
        xp: 0.0,
        pp: 0.0,
    };

    pub const fn new(xx: f64, xp: f64, pp: f64) -> Self {
        Self { xx, xp, pp }
    }

    pub const fn diag(xx: f64, pp: f64) -> Self {
        Self { xx, xp: 0.0, pp }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.pp - self.xp * self.xp
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.pp
    }

    /// `u^T sigma u`.
    pub fn quadratic_form(&self, u: [f64; 2]) -> f64 {
        self.xx * u[0] * u[0] + 2.0 * self.xp * u[0] * u[1] + self.pp * u[1] * u[1]
    }

    /// `A sigma A^T` for an arbitrary real 2×2 `A`.
    pub fn congruence(&self, a: [[f64; 2]; 2]) -> Self {
        let m = self.to_array();
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        acc += a[i][k] * m[k][l] * a[j][l];
                    }
                }
                out[i][j] = acc;
            }
        }
        Self::new(out[0][0], 0.5 * (out[0][1] + out[1][0]), out[1][1])
    }

    pub fn to_array(&self) -> [[f64; 2]; 2] {
        [[self.xx, self.xp], [self.xp, self.pp]]
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xp.is_finite() && self.pp.is_finite()
    }

    /// Positive diagonal and `det >= 1 - tol` (uncertainty relation in the
    /// ground-state-is-identity convention).
    pub fn is_physical(&self, tol: f64) -> bool {
        self.is_finite() && self.xx > 0.0 && self.pp > 0.0 && self.det() >= 1.0 - tol
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xp.abs()).max(self.pp.abs())
    }
}

impl Add for CovMatrix2 {
    type Output = CovMatrix2;
    fn add(self, o: CovMatrix2) -> CovMatrix2 {
        CovMatrix2::new(self.xx + o.xx, self.xp + o.xp, self.pp + o.pp)
    }
}

impl Sub for CovMatrix2 {
    type Output = CovMatrix2;
    fn sub(self, o: CovMatrix2) -> CovMatrix2 {
        CovMatrix2::new(self.xx - o.xx, self.xp - o.xp, self.pp - o.pp)
    }
}

impl Mul<CovMatrix2> for f64 {
    type Output = CovMatrix2;
    fn mul(self, m: CovMatrix2) -> CovMatrix2 {
        CovMatrix2::new(self * m.xx, self * m.xp, self * m.pp)
    }
}

/// First moments of `(x, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Displacement2 {
    pub x: f64,
    pub p: f64,
}

impl Displacement2 {
    pub const fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub d: Displacement2,
    pub sigma: CovMatrix2,
}

impl GaussianState {
    pub fn new(d: Displacement2, sigma: CovMatrix2) -> Self {
        Self { d, sigma }
    }

    pub fn evolve(&self, tau: f64, lambda_tilde: f64) -> Result<GaussianState> {
        Ok(GaussianState {
            d: evolve_displacement(self.d, tau)?,
            sigma: evolve_covariance(self.sigma, tau, lambda_tilde)?,
        })
    }
}

/// Squeezed thermal input state: thermal variance `T`, squeezing `r` (e-folds,
/// any sign) applied at angle `phi`.
///
/// `phi` is kept in `[0, pi)`; the covariance depends on `phi` only through
/// `2 phi`. `(phi, r)` and `(phi + pi/2, -r)` describe the same state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedThermalSpec {
    thermal_variance: f64,
    squeezing: f64,
    angle: f64,
}

impl SqueezedThermalSpec {
    pub fn new(thermal_variance: f64, squeezing: f64, angle: f64) -> Result<Self> {
        ensure(thermal_variance.is_finite() && thermal_variance >= 1.0, || {
            format!("thermal variance must be >= 1, got {thermal_variance}")
        })?;
        ensure(squeezing.is_finite(), || {
            format!("squeezing must be finite, got {squeezing}")
        })?;
        ensure(angle.is_finite(), || {
            format!("squeezing angle must be finite, got {angle}")
        })?;
        Ok(Self {
            thermal_variance,
            squeezing,
            angle: canonical_squeeze_angle(angle),
        })
    }

    /// Thermal state with no squeezing.
    pub fn thermal(thermal_variance: f64) -> Result<Self> {
        Self::new(thermal_variance, 0.0, 0.0)
    }

    /// Squeezing given as a variance ratio in dB (`10 log10 e^{2r}`).
    pub fn from_db(thermal_variance: f64, squeezing_db: f64, angle: f64) -> Result<Self> {
        Self::new(thermal_variance, db_to_squeezing(squeezing_db), angle)
    }

    pub fn thermal_variance(&self) -> f64 {
        self.thermal_variance
    }

    pub fn squeezing(&self) -> f64 {
        self.squeezing
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn squeezing_db(&self) -> f64 {
        squeezing_to_db(self.squeezing)
    }

    pub fn with_angle(&self, angle: f64) -> Self {
        Self {
            angle: canonical_squeeze_angle(angle),
            ..*self
        }
    }

    pub fn with_squeezing(&self, squeezing: f64) -> Self {
        Self { squeezing, ..*self }
    }
}

/// Reduce a squeezing angle to `[0, pi)`.
pub fn canonical_squeeze_angle(phi: f64) -> f64 {
    let a = phi.rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// `r = (dB / 20) ln 10`, so that 10 dB is a variance factor of 10.
pub fn db_to_squeezing(db: f64) -> f64 {
    db / 20.0 * LN_10
}

pub fn squeezing_to_db(r: f64) -> f64 {
    20.0 * r / LN_10
}

/// Covariance of a thermal state squeezed by `r` at angle `phi`.
pub fn initial_covariance(spec: &SqueezedThermalSpec) -> CovMatrix2 {
    let t = spec.thermal_variance;
    let (s2r, c2r) = ((2.0 * spec.squeezing).sinh(), (2.0 * spec.squeezing).cosh());
    let (s2p, c2p) = (2.0 * spec.angle).sin_cos();
    CovMatrix2::new(t * (c2r + s2r * c2p), t * s2r * s2p, t * (c2r - s2r * c2p))
}

fn check_evolution_args(tau: f64, lambda_tilde: f64) -> Result<()> {
    ensure(tau.is_finite() && tau >= 0.0, || {
        format!("tau must be finite and >= 0, got {tau}")
    })?;
    ensure(lambda_tilde.is_finite() && lambda_tilde >= 0.0, || {
        format!("lambda_tilde must be finite and >= 0, got {lambda_tilde}")
    })
}

/// `S sigma0 S^T + lambda_tilde D(tau)` with the free shear `S = [[1, tau], [0, 1]]`.
pub fn evolve_covariance(sigma0: CovMatrix2, tau: f64, lambda_tilde: f64) -> Result<CovMatrix2> {
    check_evolution_args(tau, lambda_tilde)?;
    let d = diffusion_matrix(tau);
    Ok(CovMatrix2::new(
        sigma0.xx + 2.0 * tau * sigma0.xp + tau * tau * sigma0.pp + lambda_tilde * d.xx,
        sigma0.xp + tau * sigma0.pp + lambda_tilde * d.xp,
        sigma0.pp + lambda_tilde * d.pp,
    ))
}

pub fn evolve_displacement(d0: Displacement2, tau: f64) -> Result<Displacement2> {
    ensure(tau.is_finite() && tau >= 0.0, || {
        format!("tau must be finite and >= 0, got {tau}")
    })?;
    Ok(Displacement2::new(d0.x + tau * d0.p, d0.p))
}

/// `d sigma(tau) / d lambda_tilde`.
pub fn dcov_dlambda(tau: f64) -> Result<CovMatrix2> {
    ensure(tau.is_finite() && tau >= 0.0, || {
        format!("tau must be finite and >= 0, got {tau}")
    })?;
    Ok(diffusion_matrix(tau))
}

fn diffusion_matrix(tau: f64) -> CovMatrix2 {
    CovMatrix2::new(tau * tau * tau / 3.0, tau * tau / 2.0, tau)
}

/// Free expansion of a squeezed thermal state, kept in the release frame.
///
/// `sigma(tau) = S sigma' S^T` where `sigma' = sigma0 + lambda_tilde K` and
/// `K = S^{-1} D(tau) S^{-T} = [[tau^3/3, -tau^2/2], [-tau^2/2, tau]]`. The
/// shear is symplectic, so `det sigma(tau) = det sigma'`, and quantities that
/// are invariant under symplectic congruence can be computed from `sigma'`
/// without the cancellation that plagues the entries of `sigma(tau)` at large
/// `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeExpansion {
    pub sigma0: CovMatrix2,
    pub tau: f64,
    pub lambda_tilde: f64,
}

impl FreeExpansion {
    pub fn new(spec: &SqueezedThermalSpec, tau: f64, lambda_tilde: f64) -> Result<Self> {
        Self::from_covariance(initial_covariance(spec), tau, lambda_tilde)
    }

    pub fn from_covariance(sigma0: CovMatrix2, tau: f64, lambda_tilde: f64) -> Result<Self> {
        check_evolution_args(tau, lambda_tilde)?;
        Ok(Self {
            sigma0,
            tau,
            lambda_tilde,
        })
    }

    /// `K`, the diffusion kernel pulled back through the shear.
    pub fn release_frame_derivative(&self) -> CovMatrix2 {
        let t = self.tau;
        CovMatrix2::new(t * t * t / 3.0, -t * t / 2.0, t)
    }

    /// `sigma' = sigma0 + lambda_tilde K`.
    pub fn release_frame_covariance(&self) -> CovMatrix2 {
        self.sigma0 + self.lambda_tilde * self.release_frame_derivative()
    }

    /// `sigma(tau)` in the laboratory frame.
    pub fn covariance(&self) -> CovMatrix2 {
        let s = &self.sigma0;
        let t = self.tau;
        let d = diffusion_matrix(t);
        CovMatrix2::new(
            s.xx + 2.0 * t * s.xp + t * t * s.pp + self.lambda_tilde * d.xx,
            s.xp + t * s.pp + self.lambda_tilde * d.xp,
            s.pp + self.lambda_tilde * d.pp,
        )
    }

    pub fn derivative(&self) -> CovMatrix2 {
        diffusion_matrix(self.tau)
    }

    /// `det sigma(tau)`, evaluated without cancellation as
    /// `det sigma0 + lambda_tilde tr(adj(sigma0) K) + lambda_tilde^2 tau^4 / 12`.
    pub fn determinant(&self) -> f64 {
        let s = &self.sigma0;
        let k = self.release_frame_derivative();
        let l = self.lambda_tilde;
        let t = self.tau;
        let cross = s.pp * k.xx - 2.0 * s.xp * k.xp + s.xx * k.pp;
        s.det() + l * cross + l * l * t * t * t * t / 12.0
    }

    /// The shear `S` mapping release-frame quadratures to the lab frame.
    pub fn shear(&self) -> [[f64; 2]; 2] {
        [[1.0, self.tau], [0.0, 1.0]]
    }
}

/// Physical set-up and its dimensionless reductions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// kg
    pub mass: f64,
    /// rad/s
    pub omega: f64,
    /// s
    pub time: f64,
    /// m^-2 s^-1
    pub lambda: f64,
    /// m
    pub sphere_radius: f64,
    pub repetitions: f64,
    pub tau: f64,
    /// m^-2 s^-1
    pub lambda_sql: f64,
    pub lambda_tilde: f64,
}

/// Values quoted in the MAQRO parameter table, which are not consistent with
/// the listed mass, frequency and free-fall time.
pub const TABLE1_TAU: f64 = 6.3e7;
pub const TABLE1_LAMBDA_SQL: f64 = 1.6e26;

impl Scenario {
    pub fn derive(mass: f64, omega: f64, time: f64, lambda: f64, sphere_radius: f64, repetitions: f64) -> Result<Self> {
        for (name, v) in [
            ("mass", mass),
            ("omega", omega),
            ("time", time),
            ("sphere radius", sphere_radius),
        ] {
            ensure(v.is_finite() && v > 0.0, || format!("{name} must be positive, got {v}"))?;
        }
        ensure(repetitions.is_finite() && repetitions >= 1.0, || {
            format!("repetitions must be >= 1, got {repetitions}")
        })?;
        ensure(lambda.is_finite() && lambda >= 0.0, || {
            format!("lambda must be >= 0, got {lambda}")
        })?;
        let lambda_sql = mass * omega * omega / (4.0 * HBAR);
        Ok(Self {
            mass,
            omega,
            time,
            lambda,
            sphere_radius,
            repetitions,
            tau: omega * time,
            lambda_sql,
            lambda_tilde: lambda / lambda_sql,
        })
    }

    /// Replace the derived `tau` and `Lambda_SQL` by the table's quoted values.
    pub fn with_table1_literals(mut self) -> Self {
        self.tau = TABLE1_TAU;
        self.lambda_sql = TABLE1_LAMBDA_SQL;
        self.lambda_tilde = self.lambda / self.lambda_sql;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self.lambda_tilde = lambda / self.lambda_sql;
        self
    }
}
