//! Sampling of homodyne and heterodyne outcomes, maximum-likelihood estimation
//! of the diffusion rate, and empirical checks of Cramér–Rao saturation.
//!
//! Outcomes are generated in chunks; chunk `k` draws from a ChaCha8 stream
//! keyed by `(seed, k)`, so the sequence does not depend on how chunks are
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve_covariance, initial_covariance, CovMatrix2, SqueezedThermalSpec};
use crate::error::{ensure, Error, Result};
use crate::fisher::{bound_for, heterodyne_covariance, homodyne_variance, homodyne_variance_slope, MeasurementScheme};

pub const DEFAULT_CHUNK_SIZE: usize = 8192;

/// One simulated experiment: `samples` shots of `scheme` on the given input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentRun {
    pub scheme: MeasurementScheme,
    pub spec: SqueezedThermalSpec,
    pub tau: f64,
    pub true_lambda_tilde: f64,
    pub samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
}

impl ExperimentRun {
    fn validate(&self) -> Result<()> {
        ensure(self.samples >= 2, || {
            format!("need at least 2 samples, got {}", self.samples)
        })?;
        ensure(self.chunk_size >= 1, || "chunk size must be >= 1".to_string())?;
        ensure(self.tau.is_finite() && self.tau >= 0.0, || {
            format!("tau must be >= 0, got {}", self.tau)
        })?;
        ensure(
            self.true_lambda_tilde.is_finite() && self.true_lambda_tilde >= 0.0,
            || format!("lambda_tilde must be >= 0, got {}", self.true_lambda_tilde),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimationReport {
    pub run: ExperimentRun,
    pub replicates: usize,
    pub estimate_mean: f64,
    pub empirical_variance: f64,
    /// Dimensionless Cramér–Rao bound for `samples` shots at the truth.
    pub crb: f64,
    pub saturation_ratio: f64,
    /// 95% half-width of the ratio from the chi-square variance of a sample
    /// variance, `1.96 ratio sqrt(2 / (n - 1))`.
    pub ratio_half_width: f64,
}

/// SplitMix64 finaliser, used to derive independent replicate seeds.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn chunk_bounds(n: usize, chunk_size: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let chunks = n.div_ceil(chunk_size);
    (0..chunks)
        .into_par_iter()
        .map(move |k| (k, chunk_size.min(n - k * chunk_size)))
}

/// Sum with `O(log n)` error growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Lower Cholesky factor `[[l00, 0], [l10, l11]]`.
fn cholesky(s: &CovMatrix2) -> Result<[f64; 3]> {
    if !(s.xx > 0.0) {
        return Err(Error::SingularCovariance(format!(
            "covariance not positive definite: {s:?}"
        )));
    }
    let l00 = s.xx.sqrt();
    let l10 = s.xp / l00;
    let rest = s.pp - l10 * l10;
    if !(rest > 0.0) {
        return Err(Error::SingularCovariance(format!(
            "covariance not positive definite: {s:?}"
        )));
    }
    Ok([l00, l10, rest.sqrt()])
}

fn check_sampling(n: usize, chunk_size: usize) -> Result<()> {
    ensure(n >= 1, || "need at least one sample".to_string())?;
    ensure(chunk_size >= 1, || "chunk size must be >= 1".to_string())
}

/// `n` homodyne outcomes: zero-mean Gaussian with the homodyne variance.
pub fn sample_homodyne(
    theta: f64,
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    n: usize,
    seed: u64,
    chunk_size: usize,
) -> Result<Vec<f64>> {
    check_sampling(n, chunk_size)?;
    let sd = homodyne_variance(theta, spec, tau, lambda_tilde)?.sqrt();
    let chunks: Vec<Vec<f64>> = chunk_bounds(n, chunk_size)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            (0..len).map(|_| sd * normal(&mut rng)).collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// `n` heterodyne outcome pairs drawn from the Q-function covariance `sigma + I`.
pub fn sample_heterodyne(
    spec: &SqueezedThermalSpec,
    tau: f64,
    lambda_tilde: f64,
    n: usize,
    seed: u64,
    chunk_size: usize,
) -> Result<Vec<[f64; 2]>> {
    check_sampling(n, chunk_size)?;
    let l = cholesky(&heterodyne_covariance(&evolve_covariance(
        initial_covariance(spec),
        tau,
        lambda_tilde,
    )?))?;
    let chunks: Vec<Vec<[f64; 2]>> = chunk_bounds(n, chunk_size)
        .map(|(k, len)| {
            let mut rng = chunk_rng(seed, k);
            (0..len)
                .map(|_| {
                    let z0 = normal(&mut rng);
                    let z1 = normal(&mut rng);
                    [l[0] * z0, l[1] * z0 + l[2] * z1]
                })
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Second-moment matrix `1/n sum x x^T` of heterodyne outcomes.
pub fn second_moments(outcomes: &[[f64; 2]]) -> CovMatrix2 {
    let n = outcomes.len() as f64;
    let col = |f: fn(&[f64; 2]) -> f64| pairwise_sum(&outcomes.iter().map(f).collect::<Vec<_>>()) / n;
    CovMatrix2::new(col(|o| o[0] * o[0]), col(|o| o[0] * o[1]), col(|o| o[1] * o[1]))
}

/// Affine dependence `Sigma(lambda_tilde) = A + lambda_tilde B` of a scheme's
/// outcome covariance.
enum Affine {
    Scalar { a: f64, b: f64 },
    Matrix { a: CovMatrix2, b: CovMatrix2 },
}

fn affine_model(scheme: MeasurementScheme, spec: &SqueezedThermalSpec, tau: f64) -> Result<Affine> {
    match scheme {
        MeasurementScheme::Homodyne { theta } => {
            let b = homodyne_variance_slope(theta, tau);
            if !(b > 0.0) {
                return Err(Error::NonIdentifiable(format!(
                    "homodyne variance does not depend on the diffusion rate at theta = {theta}, tau = {tau}"
                )));
            }
            Ok(Affine::Scalar {
                a: homodyne_variance(theta, spec, tau, 0.0)?,
                b,
            })
        }
        MeasurementScheme::Heterodyne => {
            if tau == 0.0 {
                return Err(Error::NonIdentifiable(
                    "heterodyne statistics are constant at tau = 0".into(),
                ));
            }
            let a = heterodyne_covariance(&evolve_covariance(initial_covariance(spec), tau, 0.0)?);
            let b = evolve_covariance(CovMatrix2::ZERO, tau, 1.0)?;
            Ok(Affine::Matrix { a, b })
        }
        MeasurementScheme::SldOptimal => Err(Error::NonIdentifiable(
            "SLD-optimal (phonon-counting) statistics are not simulated".into(),
        )),
    }
}

/// Closed-form homodyne MLE `(m2 - A) / B`, clamped at zero.
pub fn mle_homodyne(m2: f64, a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::NonIdentifiable("variance slope B must be positive".into()));
    }
    Ok(((m2 - a) / b).max(0.0))
}

fn inverse(s: &CovMatrix2) -> CovMatrix2 {
    let d = s.det();
    CovMatrix2::new(s.pp / d, -s.xp / d, s.xx / d)
}

fn trace_product(a: &CovMatrix2, b: &CovMatrix2) -> f64 {
    a.xx * b.xx + 2.0 * a.xp * b.xp + a.pp * b.pp
}

/// Derivative of the Gaussian log-likelihood (up to the factor `n/2`).
fn score(a: &CovMatrix2, b: &CovMatrix2, s: &CovMatrix2, l: f64) -> f64 {
    let inv = inverse(&(*a + l * *b));
    // tr(Sigma^-1 B Sigma^-1 S) - tr(Sigma^-1 B) with W = Sigma^-1 B Sigma^-1
    let w = b.congruence(inv.to_array());
    trace_product(&w, s) - trace_product(&inv, b)
}

/// Heterodyne MLE: maximiser over `lambda_tilde >= 0` of the Gaussian
/// log-likelihood for second-moment matrix `s`, found by bracketing and
/// bisecting the score.
pub fn mle_heterodyne(a: &CovMatrix2, b: &CovMatrix2, s: &CovMatrix2) -> Result<f64> {
    if !(b.max_abs() > 0.0) {
        return Err(Error::NonIdentifiable(
            "covariance does not depend on the diffusion rate".into(),
        ));
    }
    if score(a, b, s, 0.0) <= 0.0 {
        return Ok(0.0);
    }
    // natural scale: where the diffusion term matches the baseline
    let mut hi = (a.trace() / b.trace()).max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    let mut grow = 0;
    while score(a, b, s, hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(Error::NonIdentifiable("likelihood has no finite maximiser".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if score(a, b, s, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximum-likelihood estimate of `lambda_tilde` from homodyne outcomes.
pub fn mle_lambda_homodyne(outcomes: &[f64], theta: f64, spec: &SqueezedThermalSpec, tau: f64) -> Result<f64> {
    ensure(outcomes.len() >= 2, || "need at least 2 outcomes".to_string())?;
    match affine_model(MeasurementScheme::homodyne(theta), spec, tau)? {
        Affine::Scalar { a, b } => {
            let sq: Vec<f64> = outcomes.iter().map(|x| x * x).collect();
            mle_homodyne(pairwise_sum(&sq) / outcomes.len() as f64, a, b)
        }
        Affine::Matrix { .. } => unreachable!(),
    }
}

/// Maximum-likelihood estimate of `lambda_tilde` from heterodyne outcomes.
pub fn mle_lambda_heterodyne(outcomes: &[[f64; 2]], spec: &SqueezedThermalSpec, tau: f64) -> Result<f64> {
    ensure(outcomes.len() >= 2, || "need at least 2 outcomes".to_string())?;
    match affine_model(MeasurementScheme::Heterodyne, spec, tau)? {
        Affine::Matrix { a, b } => mle_heterodyne(&a, &b, &second_moments(outcomes)),
        Affine::Scalar { .. } => unreachable!(),
    }
}

/// Second moments of one simulated experiment, streamed chunk by chunk with
/// the same draws as [`sample_homodyne`] / [`sample_heterodyne`].
fn simulate_moments(run: &ExperimentRun, seed: u64) -> Result<CovMatrix2> {
    let n = run.samples;
    let parts: Vec<[f64; 3]> = match run.scheme {
        MeasurementScheme::Homodyne { theta } => {
            let sd = homodyne_variance(theta, &run.spec, run.tau, run.true_lambda_tilde)?.sqrt();
            chunk_bounds(n, run.chunk_size)
                .map(|(k, len)| {
                    let mut rng = chunk_rng(seed, k);
                    let sq: Vec<f64> = (0..len)
                        .map(|_| {
                            let x = sd * normal(&mut rng);
                            x * x
                        })
                        .collect();
                    [pairwise_sum(&sq), 0.0, 0.0]
                })
                .collect()
        }
        MeasurementScheme::Heterodyne => {
            let big = heterodyne_covariance(&evolve_covariance(
                initial_covariance(&run.spec),
                run.tau,
                run.true_lambda_tilde,
            )?);
            let l = cholesky(&big)?;
            chunk_bounds(n, run.chunk_size)
                .map(|(k, len)| {
                    let mut rng = chunk_rng(seed, k);
                    let mut cols = [
                        Vec::with_capacity(len),
                        Vec::with_capacity(len),
                        Vec::with_capacity(len),
                    ];
                    for _ in 0..len {
                        let z0 = normal(&mut rng);
                        let z1 = normal(&mut rng);
                        let (x, p) = (l[0] * z0, l[1] * z0 + l[2] * z1);
                        cols[0].push(x * x);
                        cols[1].push(x * p);
                        cols[2].push(p * p);
                    }
                    [pairwise_sum(&cols[0]), pairwise_sum(&cols[1]), pairwise_sum(&cols[2])]
                })
                .collect()
        }
        MeasurementScheme::SldOptimal => unreachable!(),
    };
    let total = |i: usize| pairwise_sum(&parts.iter().map(|p| p[i]).collect::<Vec<_>>()) / n as f64;
    Ok(CovMatrix2::new(total(0), total(1), total(2)))
}

/// Estimate from one simulated experiment seeded with `seed`.
pub fn simulate_estimate(run: &ExperimentRun, seed: u64) -> Result<f64> {
    run.validate()?;
    let model = affine_model(run.scheme, &run.spec, run.tau)?;
    let m = simulate_moments(run, seed)?;
    match model {
        Affine::Scalar { a, b } => mle_homodyne(m.xx, a, b),
        Affine::Matrix { a, b } => mle_heterodyne(&a, &b, &m),
    }
}

/// Replicate `run` with seeds mixed from `run.seed`, and compare the spread of
/// the estimates with the Cramér–Rao bound at the truth.
pub fn saturation_study(run: &ExperimentRun, n_replicates: usize) -> Result<EstimationReport> {
    run.validate()?;
    ensure(n_replicates >= 2, || {
        format!("need at least 2 replicates, got {n_replicates}")
    })?;
    affine_model(run.scheme, &run.spec, run.tau)?;
    let estimates: Vec<f64> = (0..n_replicates)
        .into_par_iter()
        .map(|i| simulate_estimate(run, mix_seed(run.seed, i as u64)))
        .collect::<Result<_>>()?;
    let n = estimates.len() as f64;
    let mean = pairwise_sum(&estimates) / n;
    let dev: Vec<f64> = estimates.iter().map(|e| (e - mean) * (e - mean)).collect();
    let variance = pairwise_sum(&dev) / (n - 1.0);
    let per_shot = bound_for(run.scheme, &run.spec, run.tau, run.true_lambda_tilde, 1.0)?.dimensionless_bound;
    let crb = per_shot / run.samples as f64;
    let ratio = variance / crb;
    Ok(EstimationReport {
        run: *run,
        replicates: n_replicates,
        estimate_mean: mean,
        empirical_variance: variance,
        crb,
        saturation_ratio: ratio,
        ratio_half_width: 1.96 * ratio * (2.0 / (n - 1.0)).sqrt(),
    })
}
