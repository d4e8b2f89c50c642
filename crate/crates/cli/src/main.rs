//! `colloc` — batch study runner for sparse-grid stochastic collocation.
//!
//! Each invocation runs one study described by a JSON config file and emits
//! CSV tables plus a JSON run report (see `docs/formats.md` for the schemas).
//! Exit codes: 0 success, 2 configuration error (with a location-referenced
//! message), 3 model or runtime failure. A fixed config + seed produces
//! byte-identical CSV output for any `--threads` value.

mod config;
mod output;
mod studies;

use clap::{Args, Parser, Subcommand};
use config::{Assembled, CliError};
use output::Sink;
use std::path::PathBuf;
use studies::StudyCtx;

/// Build identifier: crate version plus the git commit it was built from.
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("COLLOC_GIT_HASH"));

#[derive(Parser)]
#[command(
    name = "colloc",
    version = VERSION,
    about = "Sparse-grid stochastic collocation studies: rule diagnostics, adaptive \
             surrogates, moments, and sensitivity indices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON study configuration (one study per file).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts (created if missing).
    /// Without it, the CSV table is printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Cap the worker-thread count (default: all cores). Results do not
    /// depend on this value.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print one level of a univariate rule: nodes and PDF-adapted weights.
    Nodes(CommonArgs),
    /// Univariate quadrature convergence: moment errors vs. a reference rule.
    #[command(name = "quad-1d")]
    Quad1d(CommonArgs),
    /// Univariate interpolation convergence: cross-validation error per node count.
    #[command(name = "interp-1d")]
    Interp1d(CommonArgs),
    /// Dimension-adaptive refinement with a per-step convergence table.
    Adapt(CommonArgs),
    /// Mean/variance/skewness via collocation weights and surrogate Monte Carlo.
    Moments(CommonArgs),
    /// First- and total-order Sobol indices from the adaptive surrogate.
    Sobol(CommonArgs),
    /// Maximum surrogate-vs-model deviation over a validation sample.
    #[command(name = "cv-error")]
    CvError(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Nodes(args)
            | Command::Quad1d(args)
            | Command::Interp1d(args)
            | Command::Adapt(args)
            | Command::Moments(args)
            | Command::Sobol(args)
            | Command::CvError(args) => args,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let args = cli.command.common();
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|err| CliError::Runtime(format!("cannot set thread count: {err}")))?;
    }

    let text = std::fs::read_to_string(&args.config)
        .map_err(|err| CliError::Config(format!("{}: {err}", args.config.display())))?;
    let parsed = config::parse_config(&args.config, &text)?;
    let assembled = Assembled::build(parsed, args.seed)?;
    let sink = Sink::new(args.out.clone());
    let ctx = StudyCtx { sink: &sink, version: VERSION, threads: args.threads };

    match &cli.command {
        Command::Nodes(_) => studies::run_nodes(&assembled, &ctx),
        Command::Quad1d(_) => studies::run_quad1d(&assembled, &ctx),
        Command::Interp1d(_) => studies::run_interp1d(&assembled, &ctx),
        Command::Adapt(_) => studies::run_adapt(&assembled, &ctx),
        Command::Moments(_) => studies::run_moments(&assembled, &ctx),
        Command::Sobol(_) => studies::run_sobol(&assembled, &ctx),
        Command::CvError(_) => studies::run_cverror(&assembled, &ctx),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
