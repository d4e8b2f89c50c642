//! Statistical post-processing of sparse collocation surrogates.
//!
//! Two independent routes to the output moments are provided: applying the
//! surrogate's quadrature weights to the stored model values, and Monte
//! Carlo sampling of the surrogate itself. Agreement between the two is a
//! strong self-check — they share nothing but the surrogate.
//!
//! Variance-based sensitivity analysis uses the pick-freeze matrix scheme:
//! two independent sample blocks `A` and `B` plus, per input dimension, the
//! cross blocks obtained by swapping one column between them, for exactly
//! `(2N + 2)·M` surrogate evaluations. First-order indices use the
//! Saltelli (2002) covariance form; total-order indices use the Jansen
//! difference form. Both are normalized by the variance pooled over `A`
//! and `B`.
//!
//! All sampling is stream-seeded: a fixed RNG stream per purpose (Monte
//! Carlo moments, Sobol `A`, Sobol `B`) so the estimators are reproducible
//! and mutually independent under a single user seed.

use crate::dist::{DistributionError, JointDistribution};
use crate::interp::sparse::SparseSurrogate;
use crate::models::{ModelError, ParametricModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// RNG stream for surrogate Monte Carlo moments (stream 0 is the generic
/// sampling stream).
pub const STREAM_MC: u64 = 1;
/// RNG stream for the Sobol `A` block.
pub const STREAM_SOBOL_A: u64 = 2;
/// RNG stream for the Sobol `B` block.
pub const STREAM_SOBOL_B: u64 = 3;

/// Errors from post-processing.
#[derive(Debug, Clone, PartialEq)]
pub enum PostprocError {
    /// An operation needs a non-empty sample.
    EmptySample,
    /// An operation needs more samples than were given.
    InsufficientSamples { needed: usize, got: usize },
    /// The weight-based variance came out negative beyond rounding noise,
    /// which signals broken quadrature weights.
    NegativeVariance { variance: f64 },
    /// The sampled output variance is not positive, so normalized
    /// sensitivity indices are undefined.
    DegenerateOutput { variance: f64 },
    /// A model evaluation failed; the parameter vector is reported.
    Model { error: ModelError, params: Vec<f64> },
    /// Drawing the sample failed.
    Distribution(DistributionError),
}

impl fmt::Display for PostprocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostprocError::EmptySample => write!(f, "the sample is empty"),
            PostprocError::InsufficientSamples { needed, got } => {
                write!(f, "at least {needed} samples are required, got {got}")
            }
            PostprocError::NegativeVariance { variance } => {
                write!(f, "weight-based variance {variance} is negative beyond rounding noise")
            }
            PostprocError::DegenerateOutput { variance } => {
                write!(f, "output variance {variance} is not positive; indices are undefined")
            }
            PostprocError::Model { error, params } => {
                write!(f, "model evaluation failed at {params:?}: {error}")
            }
            PostprocError::Distribution(e) => write!(f, "sampling failed: {e}"),
        }
    }
}

impl std::error::Error for PostprocError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            PostprocError::Model { error, .. } => Some(error),
            PostprocError::Distribution(e) => Some(e),
            _ => None,
        }
    }
}

impl From<DistributionError> for PostprocError {
    fn from(e: DistributionError) -> Self {
        PostprocError::Distribution(e)
    }
}

/// Mean, variance, and skewness of a quantity of interest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub mean: f64,
    /// Clamped at 0 against rounding (a genuinely negative value is an
    /// error, not a report).
    pub variance: f64,
    /// 0 when `degenerate` is set.
    pub skewness: f64,
    /// The variance vanished (relative to the second raw moment), so the
    /// skewness is undefined and reported as 0.
    pub degenerate: bool,
    /// Model or surrogate evaluations behind this report.
    pub evaluations_used: usize,
}

/// Variance-based sensitivity indices per input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolReport {
    /// First-order indices `S_n` (Saltelli 2002 estimator).
    pub first_order: Vec<f64>,
    /// Total-order indices `T_n` (Jansen estimator).
    pub total_order: Vec<f64>,
    /// Base sample size `M` per block.
    pub sample_size: usize,
    /// Surrogate evaluations consumed — always `(2N + 2)·M`.
    pub evaluations: usize,
}

/// Surrogate accuracy metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Max absolute surrogate-vs-model deviation over a validation sample.
    pub eps_cv: f64,
    /// Absolute deviation of an estimate from a reference value.
    pub eps_abs: f64,
    /// `eps_abs / |reference|` when the reference is nonzero.
    pub eps_rel: f64,
}

impl ErrorMetrics {
    /// Bundle a cross-validation error with the deviation of `estimate`
    /// from `reference`. A zero reference degrades the relative error to 0
    /// (exact match) or infinity.
    pub fn new(eps_cv: f64, estimate: f64, reference: f64) -> Self {
        let eps_abs = (estimate - reference).abs();
        let eps_rel = if reference != 0.0 {
            eps_abs / reference.abs()
        } else if eps_abs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        ErrorMetrics { eps_cv, eps_abs, eps_rel }
    }
}

/// Assemble a report from the mean and centered moments
/// `mu_p = E[(q - mean)^p]`, flagging (and zeroing) degenerate spreads.
/// Centered accumulation keeps the variance of a constant output at the
/// square of the mean's rounding error instead of the catastrophic
/// cancellation `E[q^2] - mean^2` would produce.
fn report_from_centered(mean: f64, mu2: f64, mu3: f64, evaluations: usize) -> MomentReport {
    let variance = mu2.max(0.0);
    // The second raw moment sets the scale below which a variance carries
    // no spread information (a relative test, so genuinely tiny outputs
    // keep their genuinely tiny variances).
    let degenerate = variance <= 1e-14 * (mean * mean + variance);
    let (variance, skewness) =
        if degenerate { (0.0, 0.0) } else { (variance, mu3 / variance.powf(1.5)) };
    MomentReport { mean, variance, skewness, degenerate, evaluations_used: evaluations }
}

/// Moments through the surrogate's quadrature weights:
/// `E[q^p] ≈ Σ_k w_k q_k^p` over the stored model values, so no further
/// model or surrogate evaluations are spent.
pub fn moments_from_weights(surrogate: &SparseSurrogate) -> Result<MomentReport, PostprocError> {
    let table = surrogate.quadrature_table();
    if table.is_empty() {
        return Err(PostprocError::EmptySample);
    }
    let mean: f64 = table.iter().map(|&(w, q)| w * q).sum();
    let mu2: f64 = table.iter().map(|&(w, q)| w * (q - mean) * (q - mean)).sum();
    let mu3: f64 = table.iter().map(|&(w, q)| w * (q - mean).powi(3)).sum();
    // Sparse quadrature weights may be negative, so a (slightly) negative
    // spread is possible; beyond rounding tolerance it means the weights
    // are broken.
    let scale = (mean * mean + mu2.max(0.0)).max(1.0);
    if mu2 < -1e-12 * scale {
        return Err(PostprocError::NegativeVariance { variance: mu2 });
    }
    Ok(report_from_centered(mean, mu2, mu3, table.len()))
}

/// Population moments of a raw sample (divisor `M`, matching the
/// weight-based route where the weights sum to 1). Needs at least two
/// values.
pub fn moments_from_samples(values: &[f64]) -> Result<MomentReport, PostprocError> {
    if values.len() < 2 {
        return Err(PostprocError::InsufficientSamples { needed: 2, got: values.len() });
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let mu2 = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / m;
    let mu3 = values.iter().map(|&v| (v - mean).powi(3)).sum::<f64>() / m;
    Ok(report_from_centered(mean, mu2, mu3, values.len()))
}

/// Monte Carlo moments of the surrogate under `joint`: `count` draws on
/// the dedicated moment stream of `seed`, evaluated concurrently with a
/// fixed reduction order, so the report is deterministic per seed.
pub fn surrogate_mc(
    surrogate: &SparseSurrogate,
    joint: &JointDistribution,
    count: usize,
    seed: u64,
) -> Result<MomentReport, PostprocError> {
    if count < 2 {
        return Err(PostprocError::InsufficientSamples { needed: 2, got: count });
    }
    let values = surrogate.sample_surrogate(joint, count, seed, STREAM_MC)?;
    moments_from_samples(&values)
}

/// Maximum absolute surrogate-vs-model deviation over an explicit
/// validation sample. The sample is drawn by the caller, so validation may
/// use a different distribution than the one the surrogate was built for.
pub fn cross_validation_error(
    surrogate: &SparseSurrogate,
    model: &ParametricModel,
    sample: &[Vec<f64>],
) -> Result<f64, PostprocError> {
    if sample.is_empty() {
        return Err(PostprocError::EmptySample);
    }
    let surrogate_values = surrogate.eval_many(sample);
    let model_results: Vec<Result<f64, ModelError>> =
        sample.par_iter().map(|y| model.eval(y)).collect();
    let mut worst = 0.0f64;
    for ((result, y), approx) in model_results.into_iter().zip(sample).zip(surrogate_values) {
        let exact =
            result.map_err(|error| PostprocError::Model { error, params: y.clone() })?;
        worst = worst.max((approx - exact).abs());
    }
    Ok(worst)
}

/// Sobol indices of the surrogate under `joint` via the pick-freeze
/// scheme; see the module docs. Costs exactly `(2N + 2)·count` surrogate
/// evaluations and is deterministic per seed.
pub fn sobol_saltelli(
    surrogate: &SparseSurrogate,
    joint: &JointDistribution,
    count: usize,
    seed: u64,
) -> Result<SobolReport, PostprocError> {
    sobol_core(&|points| surrogate.eval_many(points), joint, count, seed)
}

/// Estimator core over an arbitrary batch evaluator (kept separate so the
/// estimator can be validated against analytic functions).
pub(crate) fn sobol_core(
    eval: &(dyn Fn(&[Vec<f64>]) -> Vec<f64> + Sync),
    joint: &JointDistribution,
    count: usize,
    seed: u64,
) -> Result<SobolReport, PostprocError> {
    if count < 100 {
        return Err(PostprocError::InsufficientSamples { needed: 100, got: count });
    }
    let dim = joint.dim();
    let a = joint.sample_stream(count, seed, STREAM_SOBOL_A)?;
    let b = joint.sample_stream(count, seed, STREAM_SOBOL_B)?;
    let f_a = eval(&a);
    let f_b = eval(&b);

    let m = count as f64;
    let mean_a = f_a.iter().sum::<f64>() / m;
    let mean_b = f_b.iter().sum::<f64>() / m;
    // Variance pooled over both blocks normalizes every index.
    let pooled_mean = 0.5 * (mean_a + mean_b);
    let pooled_second =
        (f_a.iter().map(|v| v * v).sum::<f64>() + f_b.iter().map(|v| v * v).sum::<f64>())
            / (2.0 * m);
    let variance = pooled_second - pooled_mean * pooled_mean;
    if variance <= 0.0 {
        return Err(PostprocError::DegenerateOutput { variance });
    }

    let mut first_order = Vec::with_capacity(dim);
    let mut total_order = Vec::with_capacity(dim);
    for n in 0..dim {
        // B with column n taken from A: shares only factor n with A.
        let b_a: Vec<Vec<f64>> = b
            .iter()
            .zip(&a)
            .map(|(row_b, row_a)| {
                let mut row = row_b.clone();
                row[n] = row_a[n];
                row
            })
            .collect();
        // A with column n taken from B: differs from A only in factor n.
        let a_b: Vec<Vec<f64>> = a
            .iter()
            .zip(&b)
            .map(|(row_a, row_b)| {
                let mut row = row_a.clone();
                row[n] = row_b[n];
                row
            })
            .collect();
        let f_ba = eval(&b_a);
        let f_ab = eval(&a_b);
        // Saltelli (2002): V_n ≈ M⁻¹ Σ f(A) f(B_A^n) − mean(A)·mean(B).
        let covariance =
            f_a.iter().zip(&f_ba).map(|(&x, &y)| x * y).sum::<f64>() / m - mean_a * mean_b;
        first_order.push(covariance / variance);
        // Jansen: E[V | all but n] ≈ (2M)⁻¹ Σ (f(A) − f(A_B^n))².
        let half_diff =
            f_a.iter().zip(&f_ab).map(|(&x, &y)| (x - y) * (x - y)).sum::<f64>() / (2.0 * m);
        total_order.push(half_diff / variance);
    }
    Ok(SobolReport {
        first_order,
        total_order,
        sample_size: count,
        evaluations: (2 * dim + 2) * count,
    })
}
