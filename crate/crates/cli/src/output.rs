//! Artifact writers: CSV tables with round-trip-exact numbers and the JSON
//! run report.
//!
//! Every CSV has a header row; floating-point cells carry 17 significant
//! digits in scientific notation, which reproduces the exact binary value on
//! re-parse. All table content is a pure function of config + seed, so a
//! fixed seed yields byte-identical files regardless of thread count; wall
//!-clock timings go only into the run report, which makes no such promise.

use crate::config::CliError;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

/// Format a float with 17 significant digits (round-trip exact for f64).
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Format an optional float; absent values become empty cells.
pub fn fmt_opt_float(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Join a multi-index's levels with `;` so it stays a single CSV cell.
pub fn fmt_levels(levels: &[u32]) -> String {
    levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";")
}

/// An in-memory CSV table; nothing touches the filesystem until the whole
/// study has succeeded, so failed runs leave no partial artifacts.
pub struct Csv {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &'static [&'static str]) -> Self {
        Csv { header, rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width must match the header");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut text = self.header.join(",");
        text.push('\n');
        for row in &self.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        text
    }
}

/// Where artifacts go: a directory (`--out`) or stdout for quick inspection.
pub struct Sink {
    out_dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(out_dir: Option<PathBuf>) -> Self {
        Sink { out_dir }
    }

    fn prepare_dir(&self) -> Result<Option<&Path>, CliError> {
        match &self.out_dir {
            None => Ok(None),
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|err| {
                    CliError::Runtime(format!("cannot create {}: {err}", dir.display()))
                })?;
                Ok(Some(dir))
            }
        }
    }

    /// Write a CSV table to `<out>/<name>`, or to stdout without `--out`.
    pub fn write_csv(&self, name: &str, csv: &Csv) -> Result<(), CliError> {
        match self.prepare_dir()? {
            Some(dir) => write_file(&dir.join(name), &csv.render()),
            None => {
                print!("{}", csv.render());
                Ok(())
            }
        }
    }

    /// Write a JSON artifact to `<out>/<name>`; skipped without `--out`.
    pub fn write_json(&self, name: &str, value: &Value) -> Result<(), CliError> {
        if let Some(dir) = self.prepare_dir()? {
            let mut text = serde_json::to_string_pretty(value)
                .map_err(|err| CliError::Runtime(format!("cannot serialize {name}: {err}")))?;
            text.push('\n');
            write_file(&dir.join(name), &text)?;
        }
        Ok(())
    }

    pub fn describe(&self) -> Option<String> {
        self.out_dir.as_ref().map(|dir| dir.display().to_string())
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|err| CliError::Runtime(format!("cannot write {}: {err}", path.display())))
}

/// The JSON run report shared by all studies: config echo, build version,
/// seed, timings, and a study-specific `results` object.
pub fn run_report(
    study: &str,
    version: &str,
    seed: u64,
    threads: Option<usize>,
    config_echo: &Value,
    total_seconds: f64,
    results: Value,
) -> Value {
    json!({
        "study": study,
        "version": version,
        "seed": seed,
        "threads": threads,
        "timings": { "total_seconds": total_seconds },
        "config": config_echo,
        "results": results,
    })
}
