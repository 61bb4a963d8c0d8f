//! `vqls-bench`: generate corpora, label them, export graph datasets, run
//! initialization benchmarks and build reports.
//!
//! Exit codes: 0 success, 1 usage or fatal error, 2 partial failure (some
//! instances failed, for example with a degenerate cost; the rest was written).

mod bench;
mod config;
mod corpus;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bench::{MinNormFlag, SplitFilter, Strategy};
use config::{FileConfig, OptFlags, Overrides, Settings};

pub fn version() -> &'static str {
    env!("VQLS_BENCH_VERSION")
}

/// Bad flags, config values or flag combinations (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub enum Outcome {
    Success,
    Partial,
}

#[derive(Parser)]
#[command(name = "vqls-bench", version = version(), about = "Variational linear solver initialization benchmarks")]
struct Cli {
    /// TOML file with [gen], [run] and [optimizer] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance corpus.
    GenData {
        /// Inclusive qubit range such as 4..7.
        #[arg(long, value_parser = corpus::parse_qubit_range)]
        qubits: (usize, usize),
        /// Instances per qubit count.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Matrix Market files to ingest alongside the synthetic instances.
        #[arg(long)]
        mtx: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attach best-of-restarts optimized parameters to train and val instances.
    Label {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
        #[command(flatten)]
        opt: OptFlags,
    },
    /// Write the signed-graph dataset as JSON Lines.
    ExportGraphs {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimize every selected instance from each initialization strategy.
    Run {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated: uniform, pca, minnorm, rowmean, predicted.
        #[arg(long, value_parser = bench::parse_strategies)]
        strategies: std::vec::Vec<Strategy>,
        /// Predictions JSON Lines; required with strategy `predicted`.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Runs per (instance, strategy).
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitFilter,
        #[arg(long, value_enum, default_value = "pinv")]
        minnorm: MinNormFlag,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        opt: OptFlags,
    },
    /// Aggregate a run directory into plot-ready tables.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Strategy the step reduction is measured against.
        #[arg(long, default_value = "uniform")]
        baseline: String,
    },
}

fn execute(cli: Cli) -> anyhow::Result<Outcome> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let no_opt = OptFlags::default();
    let mut over = Overrides {
        opt: &no_opt,
        density: None,
        gen_seed: None,
        restarts: None,
        seeds: None,
    };
    match &cli.command {
        Command::GenData { density, seed, .. } => {
            over.density = *density;
            over.gen_seed = *seed;
        }
        Command::Label { restarts, opt, .. } => {
            over.restarts = *restarts;
            over.opt = opt;
        }
        Command::Run { seeds, opt, .. } => {
            over.seeds = *seeds;
            over.opt = opt;
        }
        Command::ExportGraphs { .. } | Command::Report { .. } => {}
    }
    let settings = Settings::resolve(&file, over)?;
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }

    match &cli.command {
        Command::GenData {
            qubits,
            count,
            mtx,
            out,
            ..
        } => corpus::gen_data(
            corpus::GenRequest {
                qubits: *qubits,
                count: *count,
                mtx,
                out,
            },
            &settings,
        ),
        Command::Label { corpus, .. } => corpus::label(corpus, &settings),
        Command::ExportGraphs { corpus, out } => corpus::export_graphs(corpus, out),
        Command::Run {
            corpus,
            strategies,
            predictions,
            split,
            minnorm,
            out,
            ..
        } => bench::run(
            bench::RunRequest {
                corpus,
                strategies,
                predictions: predictions.as_deref(),
                split: *split,
                minnorm: *minnorm,
                out,
            },
            &settings,
        ),
        Command::Report {
            runs,
            out,
            baseline,
        } => bench::report(runs, out, baseline),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(2),
        Err(e) => {
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("usage error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
