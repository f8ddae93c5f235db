//! Optimal-decoder distinguishability of two diagonal Gaussians.
//!
//! For densities `p` and `q` with equal priors, the Bayes decoder picks the
//! larger density and is correct with probability
//! `P_opt = ½ ∫ p θ(p − q) + ½ ∫ q θ(q − p)` where `θ(0) = ½`. This equals
//! `(1 + TV(p, q)) / 2`. With a shared covariance it reduces to `Φ(d / 2)`
//! for the Mahalanobis distance `d`; otherwise it is estimated by sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::histogram::Histogram;
use crate::num::{standard_normal_cdf, Real};

pub const DEFAULT_MC_SAMPLES: usize = 200_000;
pub const MIN_MC_SAMPLES: usize = 1_000;
pub const DEFAULT_THRESHOLD: f64 = 0.975;
/// Relative tolerance under which two variance vectors count as equal.
pub const EQUAL_VARIANCE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistinguishError {
    #[error("mean has {mean} entries but variance has {variance}")]
    Shape { mean: usize, variance: usize },
    #[error("a Gaussian needs at least one dimension")]
    ZeroDimension,
    #[error("variance {index} is not positive and finite")]
    DegenerateVariance { index: usize },
    #[error("mean {index} is not finite")]
    NonFiniteMean { index: usize },
    #[error("dimension mismatch: {p} vs {q}")]
    DimensionMismatch { p: usize, q: usize },
    #[error("covariances differ; use the Monte Carlo estimator")]
    UnequalCovariance,
    #[error("need at least {MIN_MC_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("empty batch")]
    EmptyBatch,
    #[error("pair {index}: {source}")]
    InPair {
        index: usize,
        #[source]
        source: Box<DistinguishError>,
    },
}

/// Gaussian with diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussian<T> {
    mean: Vec<T>,
    variance: Vec<T>,
    std_dev: Vec<T>,
    /// `-½ (k ln 2π + Σ ln σ²)`
    log_norm: T,
}

impl<T: Real> DiagGaussian<T> {
    pub fn new(mean: Vec<T>, variance: Vec<T>) -> Result<Self, DistinguishError> {
        if mean.len() != variance.len() {
            return Err(DistinguishError::Shape {
                mean: mean.len(),
                variance: variance.len(),
            });
        }
        if mean.is_empty() {
            return Err(DistinguishError::ZeroDimension);
        }
        if let Some(index) = mean.iter().position(|m| !m.is_finite()) {
            return Err(DistinguishError::NonFiniteMean { index });
        }
        if let Some(index) = variance.iter().position(|v| !(v.is_finite() && *v > T::zero())) {
            return Err(DistinguishError::DegenerateVariance { index });
        }
        let k = T::from_usize(mean.len()).expect("dimension fits");
        let log_det: T = variance.iter().map(|v| v.ln()).sum();
        let log_norm = -T::lit(0.5) * (k * (T::lit(2.0) * T::PI()).ln() + log_det);
        let std_dev = variance.iter().map(|v| v.sqrt()).collect();
        Ok(DiagGaussian {
            mean,
            variance,
            std_dev,
            log_norm,
        })
    }

    /// From means and log-variances, the usual encoder output.
    pub fn from_logvar(mean: Vec<T>, logvar: Vec<T>) -> Result<Self, DistinguishError> {
        let variance = logvar.into_iter().map(|l| l.exp()).collect();
        Self::new(mean, variance)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn variance(&self) -> &[T] {
        &self.variance
    }

    pub fn log_density(&self, x: &[T]) -> T {
        let quad: T = x
            .iter()
            .zip(&self.mean)
            .zip(&self.variance)
            .map(|((&xi, &m), &v)| (xi - m) * (xi - m) / v)
            .sum();
        self.log_norm - T::lit(0.5) * quad
    }

    /// Draws one sample into `out`.
    pub fn sample_into<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        for ((o, &m), &s) in out.iter_mut().zip(&self.mean).zip(&self.std_dev) {
            *o = m + s * T::sample_standard_normal(rng);
        }
    }

    fn same_variance(&self, other: &Self, rtol: T) -> bool {
        self.variance
            .iter()
            .zip(&other.variance)
            .all(|(&a, &b)| (a - b).abs() <= rtol * a.abs().max(b.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityResult<T> {
    pub p_opt: T,
    /// Zero for the analytic path.
    pub std_error: T,
    pub method: Method,
}

fn check_dims<T: Real>(p: &DiagGaussian<T>, q: &DiagGaussian<T>) -> Result<(), DistinguishError> {
    if p.dim() != q.dim() {
        return Err(DistinguishError::DimensionMismatch { p: p.dim(), q: q.dim() });
    }
    Ok(())
}

/// `Φ(d / 2)` with `d` the Mahalanobis distance of the means under the
/// shared covariance. Variances must agree within [`EQUAL_VARIANCE_RTOL`];
/// their average is used.
pub fn p_opt_analytic_equal_cov<T: Real>(
    p: &DiagGaussian<T>,
    q: &DiagGaussian<T>,
) -> Result<DistinguishabilityResult<T>, DistinguishError> {
    check_dims(p, q)?;
    if !p.same_variance(q, T::lit(EQUAL_VARIANCE_RTOL)) {
        return Err(DistinguishError::UnequalCovariance);
    }
    let d2: T = p
        .mean
        .iter()
        .zip(&q.mean)
        .zip(p.variance.iter().zip(&q.variance))
        .map(|((&a, &b), (&va, &vb))| (a - b) * (a - b) / ((va + vb) * T::lit(0.5)))
        .sum();
    Ok(DistinguishabilityResult {
        p_opt: standard_normal_cdf(d2.sqrt() * T::lit(0.5)),
        std_error: T::zero(),
        method: Method::Analytic,
    })
}

/// Counts of `log a(x) > log b(x)` and of exact ties over `n` samples `x ~ a`.
fn half_sums<T: Real, R: rand::Rng>(a: &DiagGaussian<T>, b: &DiagGaussian<T>, n: usize, rng: &mut R) -> (u64, u64) {
    let mut x = vec![T::zero(); a.dim()];
    let (mut wins, mut ties) = (0u64, 0u64);
    for _ in 0..n {
        a.sample_into(rng, &mut x);
        let diff = a.log_density(&x) - b.log_density(&x);
        if diff > T::zero() {
            wins += 1;
        } else if diff == T::zero() {
            ties += 1;
        }
    }
    (wins, ties)
}

/// Mean and variance of the mean of θ values (1 per win, ½ per tie).
fn theta_stats(wins: u64, ties: u64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let mean = (wins as f64 + 0.5 * ties as f64) / n;
    let second = (wins as f64 + 0.25 * ties as f64) / n;
    let var = (second - mean * mean).max(0.0);
    (mean, var / n)
}

/// Monte Carlo estimate with `n` samples from each density.
///
/// Samples come from a ChaCha8 stream selected by `(seed, stream)`, so the
/// estimate depends only on the inputs. Draws from `p` precede draws from
/// `q`. The standard error combines the binomial variances of both halves.
/// Sampling noise can push the raw estimate below ½ for nearly equal
/// densities; it is clamped to `[0.5, 1]`.
pub fn p_opt_monte_carlo<T: Real>(
    p: &DiagGaussian<T>,
    q: &DiagGaussian<T>,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<DistinguishabilityResult<T>, DistinguishError> {
    check_dims(p, q)?;
    if n < MIN_MC_SAMPLES {
        return Err(DistinguishError::TooFewSamples(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (pw, pt) = half_sums(p, q, n, &mut rng);
    let (qw, qt) = half_sums(q, p, n, &mut rng);
    let (a, var_a) = theta_stats(pw, pt, n);
    let (b, var_b) = theta_stats(qw, qt, n);
    Ok(DistinguishabilityResult {
        p_opt: T::lit((0.5 * (a + b)).clamp(0.5, 1.0)),
        std_error: T::lit(0.5 * (var_a + var_b).sqrt()),
        method: Method::MonteCarlo,
    })
}

/// Analytic when the variances agree, Monte Carlo otherwise.
pub fn p_opt<T: Real>(
    p: &DiagGaussian<T>,
    q: &DiagGaussian<T>,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<DistinguishabilityResult<T>, DistinguishError> {
    match p_opt_analytic_equal_cov(p, q) {
        Err(DistinguishError::UnequalCovariance) => p_opt_monte_carlo(p, q, n, seed, stream),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub mc_samples: usize,
    pub seed: u64,
    pub bins: usize,
    pub threshold: f64,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            bins: 20,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchResult<T> {
    pub results: Vec<DistinguishabilityResult<T>>,
    /// `P_opt` over `[0.5, 1]`.
    pub histogram: Histogram,
    /// Fraction of pairs with `P_opt` above the threshold.
    pub above_threshold: f64,
}

/// Evaluates every pair in parallel on the current rayon pool. Pair `i`
/// samples from stream `i` of `config.seed`, so results do not depend on
/// scheduling.
pub fn distinguishability_batch<T: Real>(
    pairs: &[(DiagGaussian<T>, DiagGaussian<T>)],
    config: &BatchConfig,
) -> Result<BatchResult<T>, DistinguishError> {
    if pairs.is_empty() {
        return Err(DistinguishError::EmptyBatch);
    }
    let results = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (p, q))| {
            p_opt(p, q, config.mc_samples, config.seed, i as u64).map_err(|e| DistinguishError::InPair {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let values: Vec<f64> = results
        .iter()
        .map(|r| r.p_opt.to_f64().expect("finite probability"))
        .collect();
    let above = values.iter().filter(|&&v| v > config.threshold).count();
    Ok(BatchResult {
        histogram: Histogram::from_values(0.5, 1.0, config.bins, values.iter().copied()),
        above_threshold: above as f64 / values.len() as f64,
        results,
    })
}

/// One line of a posterior file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorRecord {
    pub molecule_id: String,
    pub p_mean: Vec<f64>,
    pub p_logvar: Vec<f64>,
    pub q_mean: Vec<f64>,
    pub q_logvar: Vec<f64>,
}

impl PosteriorRecord {
    pub fn gaussians<T: Real>(&self) -> Result<(DiagGaussian<T>, DiagGaussian<T>), DistinguishError> {
        let cast = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        let p = DiagGaussian::from_logvar(cast(&self.p_mean), cast(&self.p_logvar))?;
        let q = DiagGaussian::from_logvar(cast(&self.q_mean), cast(&self.q_logvar))?;
        check_dims(&p, &q)?;
        Ok((p, q))
    }
}
