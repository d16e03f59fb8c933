//! Batch front-end: parses a config, runs one experiment, writes artifacts.

pub mod config;
pub mod experiments;
pub mod heatmap;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{parse_config, ExperimentKind, ParseError, DEFAULTS_HELP};
use experiments::run_experiment;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CERTIFICATE_FAILED: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "CHIMEX_OUT";

#[derive(Parser, Debug)]
#[command(name = "chimex", version, about = "Run IMEX experiments from a JSON config", after_help = DEFAULTS_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one trajectory; writes monitors, snapshots and 2D heatmaps.
    Simulate(RunArgs),
    /// Time-step convergence study against a fine reference.
    Converge(RunArgs),
    /// Fit and certify absorbing-ball bounds on seeded ensembles.
    Dissipate(RunArgs),
    /// Certify the exponential difference bound on random pairs.
    Contract(RunArgs),
    /// Certify the L2 to H1 smoothing bound inside the H2 ball.
    Smooth(RunArgs),
    /// Hausdorff comparison of long-time snapshot clouds across step sizes.
    AttractCompare(RunArgs),
    /// Check the discrete Gronwall lemma on generated sequences.
    GronwallSelftest(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Path to the JSON config.
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output root; overrides the config's `output` and $CHIMEX_OUT.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn split(&self) -> (ExperimentKind, &RunArgs) {
        match self {
            Command::Simulate(a) => (ExperimentKind::Simulate, a),
            Command::Converge(a) => (ExperimentKind::Converge, a),
            Command::Dissipate(a) => (ExperimentKind::Dissipate, a),
            Command::Contract(a) => (ExperimentKind::Contract, a),
            Command::Smooth(a) => (ExperimentKind::Smooth, a),
            Command::AttractCompare(a) => (ExperimentKind::AttractCompare, a),
            Command::GronwallSelftest(a) => (ExperimentKind::GronwallSelftest, a),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    experiment: ExperimentKind,
    seed: u64,
    config: &'static str,
    pass: Option<bool>,
    exit_code: u8,
    files: &'a [String],
}

#[derive(Serialize)]
struct Failure<'a> {
    version: &'static str,
    experiment: ExperimentKind,
    stage: &'a str,
    error: String,
    causes: Vec<String>,
    exit_code: u8,
}

/// `<root>/<config stem>-<experiment>`.
pub fn run_dir(root: &Path, config: &Path, kind: ExperimentKind) -> PathBuf {
    let stem = config.file_stem().and_then(|s| s.to_str()).unwrap_or("config");
    root.join(format!("{stem}-{kind}"))
}

fn output_root(cli_out: Option<&Path>, cfg_out: Option<&Path>) -> PathBuf {
    cli_out
        .or(cfg_out)
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("chimex-out"))
}

fn write_failure(dir: &Path, kind: ExperimentKind, stage: &str, err: &anyhow::Error) {
    let record = Failure {
        version: env!("CARGO_PKG_VERSION"),
        experiment: kind,
        stage,
        error: err.to_string(),
        causes: err.chain().skip(1).map(|c| c.to_string()).collect(),
        exit_code: EXIT_ERROR,
    };
    let text = serde_json::to_string_pretty(&record).unwrap_or_default();
    if std::fs::create_dir_all(dir).is_ok() {
        let _ = std::fs::write(dir.join("failure.json"), text);
    }
}

fn execute(kind: ExperimentKind, args: &RunArgs, cfg: &config::ExperimentConfig, dir: &Path) -> Result<u8> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let _ = std::fs::remove_file(dir.join("failure.json"));
    std::fs::write(dir.join("config.json"), cfg.to_json())?;

    let config_dir = args.config.parent().unwrap_or(Path::new("."));
    let work = || run_experiment(kind, cfg, config_dir, dir);
    let outcome = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(work)?,
        None => work()?,
    };
    let code = match outcome.pass {
        Some(false) => EXIT_CERTIFICATE_FAILED,
        _ => EXIT_PASS,
    };
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        experiment: kind,
        seed: cfg.seed(),
        config: "config.json",
        pass: outcome.pass,
        exit_code: code,
        files: &outcome.files,
    };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(code)
}

/// Runs one subcommand and returns the process exit status.
pub fn run_cli(cli: &Cli) -> u8 {
    let (kind, args) = cli.command.split();
    let cfg = match parse_config(&args.config, kind) {
        Ok(cfg) => cfg,
        Err(e) => {
            let stage = match e {
                ParseError::Io(..) => "read",
                _ => "config",
            };
            let dir = run_dir(&output_root(args.out.as_deref(), None), &args.config, kind);
            let err = anyhow::Error::new(e);
            eprintln!("error: {err}");
            write_failure(&dir, kind, stage, &err);
            return EXIT_ERROR;
        }
    };
    let dir = run_dir(&output_root(args.out.as_deref(), cfg.output.as_deref()), &args.config, kind);
    match execute(kind, args, &cfg, &dir) {
        Ok(code) => {
            eprintln!(
                "{kind}: {} ({})",
                if code == EXIT_PASS { "ok" } else { "certificate failed" },
                dir.display()
            );
            code
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            write_failure(&dir, kind, "run", &err);
            EXIT_ERROR
        }
    }
}
