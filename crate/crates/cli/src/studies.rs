//! The seven study runners behind the subcommands.
//!
//! Every study follows the same shape: resolve the config into core types,
//! compute everything in memory, then write artifacts (a CSV table plus a
//! JSON run report; `adapt` also saves the surrogate). Nothing is written
//! until the study has succeeded, so failed runs leave no partial files.

use crate::config::{Assembled, CliError, ReferenceSpec};
use crate::output::{fmt_float, fmt_levels, fmt_opt_float, run_report, Csv, Sink};
use colloc_core::gauss::pdf_quadrature_points;
use colloc_core::interp::sparse::PointKey;
use colloc_core::postproc::{
    cross_validation_error, moments_from_weights, sobol_saltelli, surrogate_mc,
};
use colloc_core::rules::clenshaw_curtis::global_of_sorted;
use colloc_core::{
    adapt_with_monitor, AdaptiveConfig, MultiIndex, ParametricModel, RuleFamily, SparseSurrogate,
    UnivariateRule,
};
use serde_json::{json, Value};
use std::time::Instant;

/// Sample-stream id for cross-validation draws. Streams 1–3 belong to the
/// library's Monte Carlo and Sobol estimators; using a separate stream keeps
/// validation samples independent of them under a shared seed.
const STREAM_CV: u64 = 4;

const DEFAULT_MC_SAMPLES: usize = 100_000;
const DEFAULT_SOBOL_SAMPLES: usize = 16_384;
const DEFAULT_CV_SAMPLES: usize = 1_000;
const DEFAULT_REFERENCE_POINTS: usize = 30;
const DEFAULT_MAX_NODES: usize = 17;

/// Everything a runner needs besides the assembled config.
pub struct StudyCtx<'a> {
    pub sink: &'a Sink,
    pub version: &'a str,
    pub threads: Option<usize>,
}

fn config_err(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}

fn model_failure(model: &ParametricModel, params: &[f64], err: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("model '{}' failed at {params:?}: {err}", model.name()))
}

/// Evaluate the model at prepared grid points, in order.
fn evaluate_points(
    model: &ParametricModel,
    points: &[(PointKey, Vec<f64>)],
) -> Result<Vec<f64>, CliError> {
    points
        .iter()
        .map(|(_, y)| model.eval(y).map_err(|err| model_failure(model, y, err)))
        .collect()
}

/// Write the shared run report with study-specific `results`.
fn finish_report(
    ctx: &StudyCtx,
    assembled: &Assembled,
    study: &str,
    started: Instant,
    results: Value,
) -> Result<(), CliError> {
    let echo = serde_json::to_value(&assembled.config)
        .map_err(|err| CliError::Runtime(format!("cannot echo config: {err}")))?;
    let report = run_report(
        study,
        ctx.version,
        assembled.seed,
        ctx.threads,
        &echo,
        started.elapsed().as_secs_f64(),
        results,
    );
    ctx.sink.write_json("report.json", &report)
}

fn summarize(ctx: &StudyCtx, line: &str) {
    if let Some(dir) = ctx.sink.describe() {
        println!("{line} (artifacts in {dir})");
    }
}

/// The index set as a JSON array of per-dimension level arrays.
fn index_set_json(surrogate: &SparseSurrogate) -> Value {
    let sets: Vec<Vec<u32>> =
        surrogate.index_set().iter().map(|index| index.levels().to_vec()).collect();
    json!(sets)
}

// ---------------------------------------------------------------------------
// nodes
// ---------------------------------------------------------------------------

pub fn run_nodes(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    if assembled.joint.dim() != 1 {
        return Err(config_err(format!(
            "nodes study takes exactly one random input, config has {}",
            assembled.joint.dim()
        )));
    }
    let level = assembled
        .config
        .levels
        .as_ref()
        .and_then(|spec| spec.level)
        .ok_or_else(|| config_err("levels.level: required by the nodes study"))?;
    let dist = assembled.joint.marginals()[0];
    let rule = UnivariateRule::with_level(assembled.family, dist, level)
        .map_err(|err| CliError::Runtime(err.to_string()))?;
    let table = rule.quadrature_level(level);
    // Rows are in display order; the index column is each node's global
    // (insertion-order) identity within the nested sequence.
    let global: Vec<usize> = match assembled.family {
        RuleFamily::ClenshawCurtis => global_of_sorted(level),
        RuleFamily::Leja => (0..table.nodes.len()).collect(),
    };

    let mut csv = Csv::new(&["index", "node", "weight"]);
    for ((&g, &node), &weight) in global.iter().zip(&table.nodes).zip(&table.weights) {
        csv.row(vec![g.to_string(), fmt_float(node), fmt_float(weight)]);
    }
    ctx.sink.write_csv("nodes.csv", &csv)?;

    let weight_sum: f64 = table.weights.iter().sum();
    finish_report(
        ctx,
        assembled,
        "nodes",
        started,
        json!({
            "family": assembled.family.to_string(),
            "level": level,
            "node_count": table.nodes.len(),
            "weight_sum": weight_sum,
        }),
    )?;
    summarize(
        ctx,
        &format!("nodes: {} level {level}, {} nodes", assembled.family, table.nodes.len()),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// univariate sweeps (quad-1d, interp-1d)
// ---------------------------------------------------------------------------

/// Grow a one-dimensional surrogate level by level and visit it after each
/// extension (from 2 nodes for Leja, 3 for Clenshaw-Curtis, up to
/// `max_nodes`). The visitor receives the cumulative evaluation count.
fn univariate_scan(
    assembled: &Assembled,
    model: &ParametricModel,
    max_nodes: usize,
    mut visit: impl FnMut(usize, &SparseSurrogate) -> Result<(), CliError>,
) -> Result<(), CliError> {
    if assembled.joint.dim() != 1 {
        return Err(config_err(format!(
            "this study takes exactly one random input, config has {}",
            assembled.joint.dim()
        )));
    }
    let family = assembled.family;
    let smallest = family.level_to_nodes(1);
    if max_nodes < smallest {
        return Err(config_err(format!(
            "levels.max_nodes: must be at least {smallest} for {family}, got {max_nodes}"
        )));
    }
    let dist = assembled.joint.marginals()[0];
    let mut surrogate = SparseSurrogate::new(vec![UnivariateRule::new(family, dist)]);
    let mut level = 0u32;
    while family.level_to_nodes(level) <= max_nodes {
        let index = MultiIndex::new(vec![level]);
        let points = surrogate
            .prepare_index(&index)
            .map_err(|err| CliError::Runtime(err.to_string()))?;
        let values = evaluate_points(model, &points)?;
        surrogate
            .insert_term(index.clone(), &values)
            .and_then(|_| surrogate.accept_index(&index))
            .map_err(|err| CliError::Runtime(err.to_string()))?;
        if level >= 1 {
            visit(surrogate.grid_len(), &surrogate)?;
        }
        level += 1;
    }
    Ok(())
}

/// Reference mean/variance/skewness, either taken verbatim from the config
/// or computed with a density-weighted Gauss rule.
fn reference_moments(
    assembled: &Assembled,
    model: &ParametricModel,
) -> Result<(f64, f64, f64, Value), CliError> {
    let spec = assembled.config.reference.clone().unwrap_or(ReferenceSpec {
        points: None,
        mean: None,
        variance: None,
        skewness: None,
    });
    let supplied = [spec.mean, spec.variance, spec.skewness];
    if supplied.iter().any(Option::is_some) {
        if let [Some(mean), Some(variance), Some(skewness)] = supplied {
            let source = json!({
                "source": "config",
                "mean": mean, "variance": variance, "skewness": skewness,
            });
            return Ok((mean, variance, skewness, source));
        }
        return Err(config_err(
            "reference: supply all of mean/variance/skewness, or none to use the Gauss rule",
        ));
    }
    let points = spec.points.unwrap_or(DEFAULT_REFERENCE_POINTS);
    if points < 2 {
        return Err(config_err(format!("reference.points: must be at least 2, got {points}")));
    }
    let dist = assembled.joint.marginals()[0];
    let table = pdf_quadrature_points(&dist, &[], points);
    let values = table
        .iter()
        .map(|&(y, _)| model.eval(&[y]).map_err(|err| model_failure(model, &[y], err)))
        .collect::<Result<Vec<f64>, _>>()?;
    let mean: f64 = table.iter().zip(&values).map(|(&(_, w), &q)| w * q).sum();
    let mu2: f64 = table.iter().zip(&values).map(|(&(_, w), &q)| w * (q - mean).powi(2)).sum();
    let mu3: f64 = table.iter().zip(&values).map(|(&(_, w), &q)| w * (q - mean).powi(3)).sum();
    let variance = mu2.max(0.0);
    let skewness = if variance <= 1e-14 * (mean * mean + variance) {
        0.0
    } else {
        mu3 / variance.powf(1.5)
    };
    let source = json!({
        "source": "gauss",
        "points": points,
        "mean": mean, "variance": variance, "skewness": skewness,
    });
    Ok((mean, variance, skewness, source))
}

pub fn run_quad1d(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    let model = assembled.require_model("quad-1d")?;
    let max_nodes = assembled
        .config
        .levels
        .as_ref()
        .and_then(|spec| spec.max_nodes)
        .unwrap_or(DEFAULT_MAX_NODES);
    let (ref_mean, ref_variance, ref_skewness, ref_source) =
        reference_moments(assembled, model)?;

    let mut csv =
        Csv::new(&["evaluations", "abs_err_mean", "abs_err_variance", "abs_err_skewness"]);
    univariate_scan(assembled, model, max_nodes, |evaluations, surrogate| {
        let report = moments_from_weights(surrogate)?;
        csv.row(vec![
            evaluations.to_string(),
            fmt_float((report.mean - ref_mean).abs()),
            fmt_float((report.variance - ref_variance).abs()),
            fmt_float((report.skewness - ref_skewness).abs()),
        ]);
        Ok(())
    })?;
    ctx.sink.write_csv("quad1d.csv", &csv)?;
    finish_report(
        ctx,
        assembled,
        "quad-1d",
        started,
        json!({ "reference": ref_source, "max_nodes": max_nodes }),
    )?;
    summarize(ctx, &format!("quad-1d: {} up to {max_nodes} nodes", assembled.family));
    Ok(())
}

pub fn run_interp1d(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    let model = assembled.require_model("interp-1d")?;
    let max_nodes = assembled
        .config
        .levels
        .as_ref()
        .and_then(|spec| spec.max_nodes)
        .unwrap_or(DEFAULT_MAX_NODES);
    let cv_count = assembled.samples().cv.unwrap_or(DEFAULT_CV_SAMPLES);
    let validation = assembled.validation_joint()?;
    if validation.dim() != 1 {
        return Err(config_err("interp-1d takes exactly one random input"));
    }
    let sample = validation.sample_stream(cv_count, assembled.seed, STREAM_CV)?;

    let mut csv = Csv::new(&["evaluations", "cv_error"]);
    let mut last_error = f64::NAN;
    univariate_scan(assembled, model, max_nodes, |evaluations, surrogate| {
        let eps = cross_validation_error(surrogate, model, &sample)?;
        last_error = eps;
        csv.row(vec![evaluations.to_string(), fmt_float(eps)]);
        Ok(())
    })?;
    ctx.sink.write_csv("interp1d.csv", &csv)?;
    finish_report(
        ctx,
        assembled,
        "interp-1d",
        started,
        json!({ "cv_samples": cv_count, "max_nodes": max_nodes, "final_cv_error": last_error }),
    )?;
    summarize(ctx, &format!("interp-1d: final cv error {last_error:.3e}"));
    Ok(())
}

// ---------------------------------------------------------------------------
// adaptive studies (adapt, moments, sobol, cv-error)
// ---------------------------------------------------------------------------

fn adaptive_config(assembled: &Assembled, study: &str) -> Result<AdaptiveConfig, CliError> {
    let spec = assembled.require_adapt(study)?;
    let mut config = AdaptiveConfig::new(spec.budget, spec.tolerance)?;
    if let Some(cap) = spec.max_level_per_dim {
        config.max_level_per_dim = cap;
        config.validate()?;
    }
    Ok(config)
}

/// Run the adaptive loop for one of the multivariate studies; `cv_sample`
/// additionally tracks the cross-validation error after every step.
fn run_adaptive(
    assembled: &Assembled,
    study: &str,
    cv_sample: Option<&[Vec<f64>]>,
) -> Result<colloc_core::AdaptResult, CliError> {
    let model = assembled.require_model(study)?;
    let config = adaptive_config(assembled, study)?;
    let monitor_fn = cv_sample.map(|sample| {
        move |surrogate: &SparseSurrogate| {
            cross_validation_error(surrogate, model, sample).unwrap_or(f64::NAN)
        }
    });
    let monitor = monitor_fn
        .as_ref()
        .map(|f| f as &(dyn Fn(&SparseSurrogate) -> f64 + Sync));
    Ok(adapt_with_monitor(model, &assembled.joint, assembled.family, &config, monitor)?)
}

pub fn run_adapt(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    let cv_sample = match assembled.samples().cv {
        Some(count) => {
            Some(assembled.validation_joint()?.sample_stream(count, assembled.seed, STREAM_CV)?)
        }
        None => None,
    };
    let result = run_adaptive(assembled, "adapt", cv_sample.as_deref())?;

    let mut csv = Csv::new(&[
        "step",
        "chosen",
        "indicator",
        "evaluations",
        "mean",
        "variance",
        "cv_error",
    ]);
    for record in &result.records {
        csv.row(vec![
            record.step.to_string(),
            fmt_levels(record.chosen.levels()),
            fmt_float(record.indicator),
            record.evaluations.to_string(),
            fmt_float(record.mean),
            fmt_float(record.variance),
            fmt_opt_float(record.monitor),
        ]);
    }
    ctx.sink.write_csv("adapt.csv", &csv)?;

    let surrogate_doc = serde_json::to_value(&result.surrogate)
        .map_err(|err| CliError::Runtime(format!("cannot serialize surrogate: {err}")))?;
    ctx.sink.write_json("surrogate.json", &surrogate_doc)?;

    let moments = moments_from_weights(&result.surrogate)?;
    let stop = serde_json::to_value(result.stop_reason)
        .map_err(|err| CliError::Runtime(err.to_string()))?;
    finish_report(
        ctx,
        assembled,
        "adapt",
        started,
        json!({
            "stop_reason": stop,
            "steps": result.records.len(),
            "evaluations": result.surrogate.grid_len(),
            "mean": moments.mean,
            "variance": moments.variance,
            "final_index_set": index_set_json(&result.surrogate),
        }),
    )?;
    summarize(
        ctx,
        &format!(
            "adapt: {} steps, {} evaluations, E[q] = {:.12e}, V[q] = {:.12e}",
            result.records.len(),
            result.surrogate.grid_len(),
            moments.mean,
            moments.variance
        ),
    );
    Ok(())
}

pub fn run_moments(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    let result = run_adaptive(assembled, "moments", None)?;
    let weights = moments_from_weights(&result.surrogate)?;
    let mc_count = assembled.samples().mc.unwrap_or(DEFAULT_MC_SAMPLES);
    let mc = surrogate_mc(&result.surrogate, &assembled.joint, mc_count, assembled.seed)?;

    let mut csv =
        Csv::new(&["route", "mean", "variance", "skewness", "degenerate", "evaluations"]);
    for (route, report) in [("weights", &weights), ("surrogate-mc", &mc)] {
        csv.row(vec![
            route.to_string(),
            fmt_float(report.mean),
            fmt_float(report.variance),
            fmt_float(report.skewness),
            report.degenerate.to_string(),
            report.evaluations_used.to_string(),
        ]);
    }
    ctx.sink.write_csv("moments.csv", &csv)?;
    finish_report(
        ctx,
        assembled,
        "moments",
        started,
        json!({
            "weights": weights,
            "surrogate_mc": mc,
            "model_evaluations": result.surrogate.grid_len(),
            "final_index_set": index_set_json(&result.surrogate),
        }),
    )?;
    summarize(
        ctx,
        &format!(
            "moments: weights E[q] = {:.12e}, V[q] = {:.12e}; mc E[q] = {:.12e}",
            weights.mean, weights.variance, mc.mean
        ),
    );
    Ok(())
}

pub fn run_sobol(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    let result = run_adaptive(assembled, "sobol", None)?;
    let count = assembled.samples().sobol.unwrap_or(DEFAULT_SOBOL_SAMPLES);
    let report = sobol_saltelli(&result.surrogate, &assembled.joint, count, assembled.seed)?;

    let mut csv = Csv::new(&["parameter", "first_order", "total_order"]);
    for (name, (first, total)) in assembled
        .names
        .iter()
        .zip(report.first_order.iter().zip(&report.total_order))
    {
        csv.row(vec![name.clone(), fmt_float(*first), fmt_float(*total)]);
    }
    ctx.sink.write_csv("sobol.csv", &csv)?;
    finish_report(
        ctx,
        assembled,
        "sobol",
        started,
        json!({
            "parameters": assembled.names,
            "sobol": report,
            "model_evaluations": result.surrogate.grid_len(),
            "final_index_set": index_set_json(&result.surrogate),
        }),
    )?;
    summarize(
        ctx,
        &format!(
            "sobol: {} parameters, {} surrogate evaluations",
            assembled.names.len(),
            report.evaluations
        ),
    );
    Ok(())
}

pub fn run_cverror(assembled: &Assembled, ctx: &StudyCtx) -> Result<(), CliError> {
    let started = Instant::now();
    let model = assembled.require_model("cv-error")?;
    let count = assembled.samples().cv.unwrap_or(DEFAULT_CV_SAMPLES);
    let sample = assembled.validation_joint()?.sample_stream(count, assembled.seed, STREAM_CV)?;
    let result = run_adaptive(assembled, "cv-error", None)?;
    let eps = cross_validation_error(&result.surrogate, model, &sample)?;

    let mut csv = Csv::new(&["samples", "cv_error"]);
    csv.row(vec![count.to_string(), fmt_float(eps)]);
    ctx.sink.write_csv("cverror.csv", &csv)?;
    finish_report(
        ctx,
        assembled,
        "cv-error",
        started,
        json!({
            "cv_samples": count,
            "cv_error": eps,
            "model_evaluations": result.surrogate.grid_len(),
            "final_index_set": index_set_json(&result.surrogate),
        }),
    )?;
    summarize(ctx, &format!("cv-error: {eps:.3e} over {count} samples"));
    Ok(())
}
