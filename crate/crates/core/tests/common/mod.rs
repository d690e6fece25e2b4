//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use diffest::dynamics::{dcov_dlambda, evolve_covariance, initial_covariance, CovMatrix2, SqueezedThermalSpec};
use nalgebra::{Matrix2, Matrix4, Vector4};

fn to_na(s: &CovMatrix2) -> Matrix2<f64> {
    Matrix2::new(s.xx, s.xp, s.xp, s.pp)
}

/// Lab-frame covariance and its derivative, straight from the moment equations.
pub fn lab_frame(spec: &SqueezedThermalSpec, tau: f64, lambda_tilde: f64) -> (CovMatrix2, CovMatrix2) {
    (
        evolve_covariance(initial_covariance(spec), tau, lambda_tilde).unwrap(),
        dcov_dlambda(tau).unwrap(),
    )
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    // split so each double-exponential call sees a smooth, unimodal piece
    let mut total = 0.0;
    let n = 8;
    for k in 0..n {
        let lo = a + (b - a) * k as f64 / n as f64;
        let hi = a + (b - a) * (k + 1) as f64 / n as f64;
        total += quadrature::double_exponential::integrate(&f, lo, hi, 1e-14).integral;
    }
    total
}

const GAUSS_NORM: f64 = 0.398_942_280_401_432_7; // 1/sqrt(2 pi)

/// `int (dp)^2 / p dx` for a zero-mean Gaussian of variance `v`, derivative
/// `dv`, by numerical quadrature of the definition.
pub fn cfi_1d_quadrature(v: f64, dv: f64) -> f64 {
    // in x = sd z: p dx = phi(z) dz and dp/p = (z^2 - 1) dv / (2 v)
    let rel = dv / v;
    integrate(
        |z| {
            let phi = GAUSS_NORM * (-0.5 * z * z).exp();
            let score = 0.5 * (z * z - 1.0) * rel;
            phi * score * score
        },
        -14.0,
        14.0,
    )
}

/// Two-dimensional analogue of [`cfi_1d_quadrature`] for covariance `s`.
pub fn cfi_2d_quadrature(s: &CovMatrix2, ds: &CovMatrix2) -> f64 {
    let sm = to_na(s);
    let inv = sm.try_inverse().unwrap();
    let w = inv * to_na(ds) * inv;
    let tr = (inv * to_na(ds)).trace();
    let l = sm.cholesky().unwrap().l();
    let scale = tr * tr + (w * sm).norm_squared();
    let inner = |z0: f64| {
        integrate(
            |z1| {
                let x = l * nalgebra::Vector2::new(z0, z1);
                let q = (x.transpose() * w * x)[(0, 0)];
                let score = 0.5 * (q - tr);
                let phi = GAUSS_NORM * GAUSS_NORM * (-0.5 * (z0 * z0 + z1 * z1)).exp();
                phi * score * score / scale
            },
            -13.0,
            13.0,
        )
    };
    integrate(inner, -13.0, 13.0) * scale
}

/// Single-mode Gaussian QFI from purity:
/// `H = tr[(s^-1 ds)^2] / (2 (1 + P^2)) + 2 P'^2 / (1 - P^4)`, `P = 1/sqrt(det s)`.
pub fn qfi_purity_formula(s: &CovMatrix2, ds: &CovMatrix2) -> f64 {
    let sm = to_na(s);
    let x = sm.try_inverse().unwrap() * to_na(ds);
    let det = sm.determinant();
    let p = 1.0 / det.sqrt();
    let dp = -0.5 * p * x.trace();
    (x * x).trace() / (2.0 * (1.0 + p * p)) + 2.0 * dp * dp / (1.0 - p.powi(4))
}

/// QFI by solving `(s (x) s - O (x) O) vec L = vec ds` with nalgebra's LU.
pub fn qfi_kron_solve(s: &CovMatrix2, ds: &CovMatrix2) -> f64 {
    let sm = to_na(s);
    let o = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    let m = sm.kronecker(&sm) - o.kronecker(&o);
    let m: Matrix4<f64> = m.fixed_view::<4, 4>(0, 0).into();
    let v = Vector4::new(ds.xx, ds.xp, ds.xp, ds.pp);
    let l = m.lu().solve(&v).unwrap();
    0.5 * v.dot(&l)
}

/// Minimiser of `f` on `[lo, hi]`: grid scan, then the root of the central
/// difference `f(x + h) - f(x - h)` near the best grid point for two step
/// sizes, Richardson-extrapolated (the root moves as `h^2`). Steps near a grid
/// cell keep rounding noise small where the minimum is flat, while staying
/// well inside sharp minima.
pub fn argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 2000;
    let step = (hi - lo) / n as f64;
    let mut best = (lo, f64::INFINITY);
    for k in 0..=n {
        let x = lo + k as f64 * step;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let root = |h: f64| -> Option<f64> {
        let g = |x: f64| f(x + h) - f(x - h);
        let (mut a, mut b) = (best.0 - 2.0 * step, best.0 + 2.0 * step);
        if g(a) >= 0.0 || g(b) <= 0.0 {
            return None;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    };
    match (root(0.5 * step), root(0.25 * step)) {
        (Some(coarse), Some(fine)) => (4.0 * fine - coarse) / 3.0,
        _ => best.0,
    }
}

/// Distance between two angles modulo `period`.
pub fn angle_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
