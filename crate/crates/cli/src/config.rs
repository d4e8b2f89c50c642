//! Study configuration: a single JSON document per study, deserialized into
//! [`StudyConfig`] and then assembled into core types by [`Assembled::build`].
//!
//! The document describes the model, one entry per model parameter (either a
//! bounded distribution or a fixed value), the rule family, and study-kind
//! specific controls. Parameters carrying a distribution become the random
//! dimensions, in document order; fixed parameters are frozen into the model
//! closure so every study runs on the reduced random-parameter space.
//!
//! Configuration problems (unparseable JSON, unknown fields, out-of-range
//! values, dimension mismatches) map to exit code 2 with a message naming the
//! offending location; failures while running a valid study (model errors,
//! I/O) map to exit code 3.

use colloc_core::models::{self, ModelError};
use colloc_core::{
    AdaptError, BoundedDistribution, DistributionError, JointDistribution, ParametricModel,
    PostprocError, RuleFamily,
};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A study failure, split by exit code: configuration problems exit with 2,
/// runtime problems with 3.
#[derive(Debug)]
pub enum CliError {
    /// The configuration is unusable; the message names the offending file,
    /// line, or field.
    Config(String),
    /// A valid study failed while running (model evaluation, sampling, or
    /// writing artifacts).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<AdaptError> for CliError {
    fn from(err: AdaptError) -> Self {
        match err {
            AdaptError::InvalidConfig(msg) => CliError::Config(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<PostprocError> for CliError {
    fn from(err: PostprocError) -> Self {
        match err {
            PostprocError::InsufficientSamples { .. } => CliError::Config(err.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<DistributionError> for CliError {
    fn from(err: DistributionError) -> Self {
        CliError::Runtime(err.to_string())
    }
}

/// The JSON study document. One study per file; unknown fields are rejected
/// so typos surface as configuration errors instead of silently-ignored keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Model block; required by every study except `nodes`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    /// One entry per model parameter, in the model's parameter order.
    pub inputs: Vec<InputSpec>,
    /// Node family: `"clenshaw-curtis"` or `"leja"`.
    pub rule: RuleFamily,
    /// RNG seed for all sampling; the `--seed` flag overrides it. Default 0.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Level/node-count controls for the univariate studies.
    #[serde(default)]
    pub levels: Option<LevelsSpec>,
    /// Adaptive-loop controls for the multivariate studies.
    #[serde(default)]
    pub adapt: Option<AdaptSpec>,
    /// Sample counts for Monte Carlo, Sobol, and cross-validation sampling.
    #[serde(default)]
    pub samples: Option<SamplesSpec>,
    /// Reference-statistics controls for error columns (`quad-1d`).
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    /// Optional cross-validation sampling distributions, one per random
    /// dimension; defaults to the input distributions themselves.
    #[serde(default)]
    pub validation: Option<Vec<ValidationSpec>>,
}

/// Which registered model to evaluate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Registry name, e.g. `"waveguide-s11"` or `"additive-linear"`.
    pub name: String,
    /// Operating frequency for the waveguide models (GHz); default 6.
    #[serde(default)]
    pub frequency_ghz: Option<f64>,
}

/// One model parameter: either random (a distribution) or fixed (a value).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// Display name used in reports; defaults to the model's canonical
    /// parameter name where known, else `y<k>`.
    #[serde(default)]
    pub name: Option<String>,
    /// Length unit of `a`/`b`/`fixed`: omitted for SI, or `"mm"`.
    #[serde(default)]
    pub unit: Option<String>,
    /// Bounded distribution; exactly one of `dist`/`fixed` must be present.
    #[serde(default)]
    pub dist: Option<DistSpec>,
    /// Fixed (deterministic) value.
    #[serde(default)]
    pub fixed: Option<f64>,
}

/// A bounded univariate distribution on `[a, b]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    /// `"uniform"` or `"beta"`.
    pub kind: String,
    pub a: f64,
    pub b: f64,
    /// Beta shape `alpha`; required for (and exclusive to) `"beta"`.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Beta shape `beta`; required for (and exclusive to) `"beta"`.
    #[serde(default)]
    pub beta: Option<f64>,
}

/// A cross-validation sampling distribution for one random dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSpec {
    #[serde(default)]
    pub unit: Option<String>,
    pub dist: DistSpec,
}

/// Node-count controls for the univariate studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsSpec {
    /// Single rule level for the `nodes` study.
    #[serde(default)]
    pub level: Option<u32>,
    /// Largest node count for the `quad-1d`/`interp-1d` sweeps; default 17.
    #[serde(default)]
    pub max_nodes: Option<usize>,
}

/// Adaptive-loop controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptSpec {
    /// Evaluation budget (unique grid points including the margin).
    pub budget: usize,
    /// Indicator-sum tolerance.
    pub tolerance: f64,
    /// Per-dimension level cap; default 30.
    #[serde(default)]
    pub max_level_per_dim: Option<u32>,
}

/// Sample counts; defaults: `mc` 100000, `sobol` 16384, `cv` 1000.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesSpec {
    #[serde(default)]
    pub mc: Option<usize>,
    #[serde(default)]
    pub sobol: Option<usize>,
    #[serde(default)]
    pub cv: Option<usize>,
}

/// Reference statistics for the `quad-1d` error columns: either computed by
/// an `points`-point density-weighted Gauss rule (default 30 points) or
/// supplied directly (all three of `mean`/`variance`/`skewness`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub mean: Option<f64>,
    #[serde(default)]
    pub variance: Option<f64>,
    #[serde(default)]
    pub skewness: Option<f64>,
}

impl SamplesSpec {
    fn empty() -> Self {
        SamplesSpec { mc: None, sobol: None, cv: None }
    }
}

/// Parse the study document, reporting JSON syntax and schema violations
/// with the file name and line/column position.
pub fn parse_config(path: &std::path::Path, text: &str) -> Result<StudyConfig, CliError> {
    serde_json::from_str(text)
        .map_err(|err| CliError::Config(format!("{}: {err}", path.display())))
}

fn config_err(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn unit_scale(unit: Option<&str>, path: &str) -> Result<f64, CliError> {
    match unit {
        None | Some("si") => Ok(1.0),
        Some("mm") => Ok(1e-3),
        Some(other) => Err(config_err(format!(
            "{path}.unit: unknown unit '{other}' (expected \"mm\" or omission for SI)"
        ))),
    }
}

impl DistSpec {
    /// Construct the distribution, scaling the interval by `scale`.
    fn build(&self, scale: f64, path: &str) -> Result<BoundedDistribution, CliError> {
        let a = self.a * scale;
        let b = self.b * scale;
        let result = match self.kind.as_str() {
            "uniform" => {
                if self.alpha.is_some() || self.beta.is_some() {
                    return Err(config_err(format!(
                        "{path}: uniform distributions take no alpha/beta shapes"
                    )));
                }
                BoundedDistribution::uniform(a, b)
            }
            "beta" => {
                let alpha = self.alpha.ok_or_else(|| {
                    config_err(format!("{path}.alpha: required for kind \"beta\""))
                })?;
                let beta = self.beta.ok_or_else(|| {
                    config_err(format!("{path}.beta: required for kind \"beta\""))
                })?;
                BoundedDistribution::beta(alpha, beta, a, b)
            }
            other => {
                return Err(config_err(format!(
                    "{path}.kind: unknown distribution '{other}' (expected \"uniform\" or \"beta\")"
                )));
            }
        };
        result.map_err(|err| config_err(format!("{path}: {err}")))
    }
}

/// Canonical parameter names for models whose coordinates have a physical
/// meaning; other models use positional `y<k>` names.
fn default_names(model_name: Option<&str>, dim: usize) -> Vec<String> {
    if model_name == Some("waveguide-s11") && dim == 6 {
        return ["w", "h", "l", "d", "eps_r", "mu_r"].iter().map(|s| s.to_string()).collect();
    }
    if model_name == Some("waveguide-s11-width") && dim == 1 {
        return vec!["w".to_string()];
    }
    (1..=dim).map(|k| format!("y{k}")).collect()
}

fn build_named_model(spec: &ModelSpec, dim: usize) -> Result<ParametricModel, CliError> {
    let is_waveguide = spec.name.starts_with("waveguide");
    if let Some(ghz) = spec.frequency_ghz {
        if !is_waveguide {
            return Err(config_err(format!(
                "model.frequency_ghz applies only to waveguide models, not '{}'",
                spec.name
            )));
        }
        if ghz.is_nan() || ghz <= 0.0 {
            return Err(config_err(format!(
                "model.frequency_ghz must be a positive number, got {ghz}"
            )));
        }
    }
    let f_hz = spec.frequency_ghz.unwrap_or(6.0) * 1e9;
    let model = match spec.name.as_str() {
        "waveguide-s11" => {
            if dim != 6 {
                return Err(config_err(format!(
                    "model 'waveguide-s11' takes 6 inputs, config lists {dim}"
                )));
            }
            models::waveguide_model(f_hz)
        }
        "waveguide-s11-width" => {
            if dim != 1 {
                return Err(config_err(format!(
                    "model 'waveguide-s11-width' takes 1 input, config lists {dim}"
                )));
            }
            models::waveguide_width_model(f_hz)
        }
        name => models::model_by_name(name, dim).map_err(|err| match err {
            ModelError::UnknownModel(_) | ModelError::DimensionMismatch { .. } => {
                config_err(format!("model.name: {err}"))
            }
            other => CliError::Runtime(other.to_string()),
        })?,
    };
    Ok(model)
}

/// A study config resolved into core types: the model reduced to its random
/// parameters, the joint distribution over those parameters, and their names.
pub struct Assembled {
    /// Model over the random dimensions only (fixed parameters frozen in);
    /// `None` when the config has no model block.
    pub model: Option<ParametricModel>,
    pub joint: JointDistribution,
    /// Display names of the random dimensions, in order.
    pub names: Vec<String>,
    pub family: RuleFamily,
    pub seed: u64,
    pub config: StudyConfig,
}

impl Assembled {
    pub fn build(config: StudyConfig, seed_override: Option<u64>) -> Result<Self, CliError> {
        if config.inputs.is_empty() {
            return Err(config_err("inputs: at least one entry is required"));
        }
        let full_dim = config.inputs.len();
        let full_names: Vec<String> = {
            let defaults =
                default_names(config.model.as_ref().map(|m| m.name.as_str()), full_dim);
            config
                .inputs
                .iter()
                .zip(defaults)
                .map(|(input, default)| input.name.clone().unwrap_or(default))
                .collect()
        };

        // Split inputs into random dimensions (in order) and frozen values.
        let mut dists = Vec::new();
        let mut names = Vec::new();
        let mut slots = Vec::new();
        let mut template = vec![0.0f64; full_dim];
        for (k, input) in config.inputs.iter().enumerate() {
            let path = format!("inputs[{k}]");
            let scale = unit_scale(input.unit.as_deref(), &path)?;
            match (&input.dist, input.fixed) {
                (Some(dist), None) => {
                    dists.push(dist.build(scale, &format!("{path}.dist"))?);
                    names.push(full_names[k].clone());
                    slots.push(k);
                }
                (None, Some(value)) => {
                    if !value.is_finite() {
                        return Err(config_err(format!("{path}.fixed: must be finite")));
                    }
                    template[k] = value * scale;
                }
                (Some(_), Some(_)) => {
                    return Err(config_err(format!(
                        "{path}: give either dist or fixed, not both"
                    )));
                }
                (None, None) => {
                    return Err(config_err(format!("{path}: give either dist or fixed")));
                }
            }
        }
        if dists.is_empty() {
            return Err(config_err("inputs: at least one entry must carry a distribution"));
        }
        let joint = JointDistribution::new(dists)
            .map_err(|err| config_err(format!("inputs: {err}")))?;

        let model = match &config.model {
            Some(spec) => {
                let inner = build_named_model(spec, full_dim)?;
                Some(reduce_model(inner, template, slots))
            }
            None => None,
        };

        let seed = seed_override.or(config.seed).unwrap_or(0);
        Ok(Assembled { model, joint, names, family: config.rule, seed, config })
    }

    /// The model block, or a configuration error naming the study.
    pub fn require_model(&self, study: &str) -> Result<&ParametricModel, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| config_err(format!("model: block is required by the {study} study")))
    }

    /// Adaptive-loop controls, or a configuration error naming the study.
    pub fn require_adapt(&self, study: &str) -> Result<&AdaptSpec, CliError> {
        self.config
            .adapt
            .as_ref()
            .ok_or_else(|| config_err(format!("adapt: block is required by the {study} study")))
    }

    pub fn samples(&self) -> SamplesSpec {
        self.config.samples.clone().unwrap_or_else(SamplesSpec::empty)
    }

    /// The cross-validation sampling distribution: the `validation` block if
    /// present (lengths must match the random dimensions), else the input
    /// joint itself.
    pub fn validation_joint(&self) -> Result<JointDistribution, CliError> {
        match &self.config.validation {
            None => Ok(self.joint.clone()),
            Some(specs) => {
                if specs.len() != self.joint.dim() {
                    return Err(config_err(format!(
                        "validation: expected one distribution per random dimension ({}), got {}",
                        self.joint.dim(),
                        specs.len()
                    )));
                }
                let dists = specs
                    .iter()
                    .enumerate()
                    .map(|(k, spec)| {
                        let path = format!("validation[{k}]");
                        let scale = unit_scale(spec.unit.as_deref(), &path)?;
                        spec.dist.build(scale, &format!("{path}.dist"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                JointDistribution::new(dists)
                    .map_err(|err| config_err(format!("validation: {err}")))
            }
        }
    }
}

/// Wrap `inner` so only the random parameters vary: values are scattered
/// into the full parameter vector at `slots`, with fixed values elsewhere.
fn reduce_model(inner: ParametricModel, template: Vec<f64>, slots: Vec<usize>) -> ParametricModel {
    if slots.len() == inner.dim() {
        return inner;
    }
    let name = inner.name().to_string();
    let dim = slots.len();
    ParametricModel::new(name, dim, move |y: &[f64]| {
        let mut full = template.clone();
        for (value, &slot) in y.iter().zip(&slots) {
            full[slot] = *value;
        }
        inner.eval(&full)
    })
}
