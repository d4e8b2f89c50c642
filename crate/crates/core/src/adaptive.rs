//! Greedy dimension-adaptive refinement of sparse collocation surrogates.
//!
//! Starting from the root index, the driver repeatedly evaluates the model
//! on the new points of every admissible candidate index, turns the
//! resulting hierarchical surpluses into error indicators (mean absolute
//! surplus over the candidate's new points), and accepts the candidate with
//! the largest indicator into the index set. Indicators are computed once
//! per index and cached: once a candidate's surpluses are known they never
//! change (nested rules make surpluses independent of later extensions), so
//! each grid point is evaluated exactly once across the whole run.
//!
//! The loop stops when the unique-point count of the accepted set plus its
//! admissible margin reaches the evaluation budget, or when the margin's
//! indicator sum drops to the tolerance. The returned surrogate contains
//! the margin's contributions (the final set is Λ together with its
//! admissible set), which costs nothing extra — those points were already
//! evaluated.
//!
//! Within one candidate batch, model evaluations may run concurrently; all
//! reductions happen in a fixed order, so results are bitwise independent
//! of the thread count.

use crate::dist::JointDistribution;
use crate::interp::sparse::{PointKey, SparseError, SparseSurrogate};
use crate::models::{ModelError, ParametricModel};
use crate::multiindex::MultiIndex;
use crate::rules::{RuleFamily, UnivariateRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Errors from the adaptive driver.
#[derive(Debug, Clone, PartialEq)]
pub enum AdaptError {
    /// The configuration is unusable (budget below 1, negative tolerance,
    /// dimension mismatch between model and distribution, ...).
    InvalidConfig(String),
    /// The model failed at a parameter vector; the vector is reported.
    Model { error: ModelError, params: Vec<f64> },
    /// Refinement tried to grow a dimension past the safety cap.
    LevelCapExceeded { index: MultiIndex, cap: u32 },
    /// Internal surrogate bookkeeping failed.
    Sparse(SparseError),
}

impl fmt::Display for AdaptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdaptError::InvalidConfig(msg) => write!(f, "invalid adaptive configuration: {msg}"),
            AdaptError::Model { error, params } => {
                write!(f, "model evaluation failed at {params:?}: {error}")
            }
            AdaptError::LevelCapExceeded { index, cap } => {
                write!(f, "index {index} exceeds the per-dimension level cap {cap}")
            }
            AdaptError::Sparse(e) => write!(f, "surrogate update failed: {e}"),
        }
    }
}

impl std::error::Error for AdaptError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            AdaptError::Model { error, .. } => Some(error),
            AdaptError::Sparse(e) => Some(e),
            _ => None,
        }
    }
}

impl From<SparseError> for AdaptError {
    fn from(e: SparseError) -> Self {
        AdaptError::Sparse(e)
    }
}

/// Stopping controls for the adaptive loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    /// Evaluation budget: stop once the unique grid points of the accepted
    /// set plus its margin reach this count.
    pub budget: usize,
    /// Indicator tolerance: stop once the margin's indicator sum is at or
    /// below this value.
    pub tolerance: f64,
    /// Safety cap on any single dimension's rule level; exceeding it is an
    /// error rather than silent truncation.
    pub max_level_per_dim: u32,
}

impl AdaptiveConfig {
    /// Default safety cap: a Clenshaw-Curtis rule at this level would
    /// already need 2³⁰ + 1 nodes.
    pub const DEFAULT_LEVEL_CAP: u32 = 30;

    pub fn new(budget: usize, tolerance: f64) -> Result<Self, AdaptError> {
        let config =
            AdaptiveConfig { budget, tolerance, max_level_per_dim: Self::DEFAULT_LEVEL_CAP };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), AdaptError> {
        if self.budget < 1 {
            return Err(AdaptError::InvalidConfig("budget must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(AdaptError::InvalidConfig(format!(
                "tolerance must be a number >= 0, got {}",
                self.tolerance
            )));
        }
        if self.max_level_per_dim < 1 {
            return Err(AdaptError::InvalidConfig("level cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why the refinement loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Unique points of Λ plus margin reached the budget.
    Budget,
    /// The margin's indicator sum dropped to the tolerance.
    Tolerance,
}

/// One step of the refinement history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRecord {
    /// Step counter; step 0 is the root insertion.
    pub step: usize,
    /// The index accepted at this step.
    pub chosen: MultiIndex,
    /// The chosen index's error indicator (mean absolute surplus).
    pub indicator: f64,
    /// Cumulative unique model evaluations after this step (accepted set
    /// plus evaluated margin).
    pub evaluations: usize,
    /// Current expectation of the surrogate (all evaluated terms).
    pub mean: f64,
    /// Current variance of the surrogate (clamped at 0 against rounding).
    pub variance: f64,
    /// Optional external monitor value (e.g. a cross-validation error).
    pub monitor: Option<f64>,
}

/// Result of an adaptive run.
#[derive(Debug)]
pub struct AdaptResult {
    /// Surrogate over Λ ∪ A(Λ) — the accepted set plus its margin.
    pub surrogate: SparseSurrogate,
    /// Per-step refinement history (step 0 = root).
    pub records: Vec<RefinementRecord>,
    pub stop_reason: StopReason,
}

/// Run the dimension-adaptive loop; see the module docs. `monitor`, when
/// given, is invoked on the surrogate after every step and its value stored
/// in the record (used for cross-validation tracking).
pub fn adapt_with_monitor(
    model: &ParametricModel,
    joint: &JointDistribution,
    family: RuleFamily,
    config: &AdaptiveConfig,
    monitor: Option<&(dyn Fn(&SparseSurrogate) -> f64 + Sync)>,
) -> Result<AdaptResult, AdaptError> {
    config.validate()?;
    let dim = joint.dim();
    if model.dim() != dim {
        return Err(AdaptError::InvalidConfig(format!(
            "model has {} parameters but the joint distribution has {dim}",
            model.dim()
        )));
    }

    let rules: Vec<UnivariateRule> = joint
        .marginals()
        .iter()
        .map(|dist| UnivariateRule::new(family, *dist))
        .collect();
    let mut surrogate = SparseSurrogate::new(rules);
    // Margin bookkeeping: evaluated-but-not-accepted indices with their
    // cached indicators.
    let mut margin: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    let mut records = Vec::new();

    let root = MultiIndex::root(dim);
    let indicator =
        evaluate_candidate(model, &mut surrogate, &root, config.max_level_per_dim)?;
    surrogate.accept_index(&root)?;
    push_record(&mut records, 0, root, indicator, &surrogate, monitor);

    let stop_reason = loop {
        // Evaluate any admissible candidates that do not have terms yet;
        // indicators of already-evaluated candidates are cached.
        for candidate in surrogate.index_set().admissible_set() {
            if !surrogate.contains_term(&candidate) {
                let indicator = evaluate_candidate(
                    model,
                    &mut surrogate,
                    &candidate,
                    config.max_level_per_dim,
                )?;
                margin.insert(candidate, indicator);
            }
        }
        if surrogate.grid_len() >= config.budget {
            break StopReason::Budget;
        }
        let indicator_sum: f64 = margin.values().sum();
        if indicator_sum <= config.tolerance {
            break StopReason::Tolerance;
        }
        // Argmax over the margin; ties go to the lexicographically smallest
        // index (strict comparison over an ascending iteration).
        let (chosen, indicator) = {
            let mut best: Option<(&MultiIndex, f64)> = None;
            for (index, &eta) in &margin {
                if best.map_or(true, |(_, b)| eta > b) {
                    best = Some((index, eta));
                }
            }
            let (index, eta) = best.expect("margin cannot be empty before tolerance hit");
            (index.clone(), eta)
        };
        margin.remove(&chosen);
        surrogate.accept_index(&chosen)?;
        let step = records.len();
        push_record(&mut records, step, chosen, indicator, &surrogate, monitor);
    };

    // Final augmentation: the margin's terms are already in the surrogate;
    // formally accept them so Λ becomes Λ ∪ A(Λ).
    for (index, _) in std::mem::take(&mut margin) {
        surrogate.accept_index(&index)?;
    }
    Ok(AdaptResult { surrogate, records, stop_reason })
}

/// [`adapt_with_monitor`] without a monitor.
pub fn adapt(
    model: &ParametricModel,
    joint: &JointDistribution,
    family: RuleFamily,
    config: &AdaptiveConfig,
) -> Result<AdaptResult, AdaptError> {
    adapt_with_monitor(model, joint, family, config, None)
}

/// Evaluate the model on a candidate's new points (concurrently, with a
/// fixed reduction order) and insert its term; returns the indicator.
fn evaluate_candidate(
    model: &ParametricModel,
    surrogate: &mut SparseSurrogate,
    index: &MultiIndex,
    level_cap: u32,
) -> Result<f64, AdaptError> {
    if index.max_level() > level_cap {
        return Err(AdaptError::LevelCapExceeded { index: index.clone(), cap: level_cap });
    }
    let points = surrogate.prepare_index(index)?;
    let values = evaluate_batch(model, &points)?;
    let stats = surrogate.insert_term(index.clone(), &values)?;
    Ok(stats.indicator)
}

fn evaluate_batch(
    model: &ParametricModel,
    points: &[(PointKey, Vec<f64>)],
) -> Result<Vec<f64>, AdaptError> {
    let results: Vec<Result<f64, ModelError>> =
        points.par_iter().map(|(_, y)| model.eval(y)).collect();
    // Surface the first failure in point order, independent of scheduling.
    results
        .into_iter()
        .zip(points)
        .map(|(result, (_, y))| {
            result.map_err(|error| AdaptError::Model { error, params: y.clone() })
        })
        .collect()
}

fn push_record(
    records: &mut Vec<RefinementRecord>,
    step: usize,
    chosen: MultiIndex,
    indicator: f64,
    surrogate: &SparseSurrogate,
    monitor: Option<&(dyn Fn(&SparseSurrogate) -> f64 + Sync)>,
) {
    let table = surrogate.quadrature_table();
    let mean: f64 = table.iter().map(|&(w, q)| w * q).sum();
    let second: f64 = table.iter().map(|&(w, q)| w * q * q).sum();
    let variance = (second - mean * mean).max(0.0);
    records.push(RefinementRecord {
        step,
        chosen,
        indicator,
        evaluations: surrogate.grid_len(),
        mean,
        variance,
        monitor: monitor.map(|m| m(surrogate)),
    });
}
