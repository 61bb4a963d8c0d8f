//! Layered settings: command-line flags over a TOML file over defaults.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use vqls_core::driver::{RunConfig, DEFAULT_RESTARTS};
use vqls_core::{CostKind, Optimizer};

use crate::UsageError;

pub const DEFAULT_DENSITY: f64 = 0.01;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub gen: GenSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSection {
    pub density: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub cost_kind: Option<CostKind>,
    pub max_iters: Option<usize>,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub seeds: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub kind: Option<OptimizerKind>,
    pub lr: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
    GradientDescent,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }
}

/// Optimization flags shared by `label` and `run`.
#[derive(Debug, Clone, Default, Args)]
pub struct OptFlags {
    #[arg(long, value_parser = parse_cost_kind)]
    pub cost_kind: Option<CostKind>,
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Convergence threshold on the tracked cost.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_cost_kind(s: &str) -> std::result::Result<CostKind, String> {
    s.parse().map_err(|e: vqls_core::Error| e.to_string())
}

/// Fully resolved settings, stamped into every output's metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub density: f64,
    pub gen_seed: u64,
    pub run: RunConfig,
    pub restarts: usize,
    pub seeds: usize,
    pub threads: Option<usize>,
}

pub struct Overrides<'a> {
    pub opt: &'a OptFlags,
    pub density: Option<f64>,
    pub gen_seed: Option<u64>,
    pub restarts: Option<usize>,
    pub seeds: Option<usize>,
}

impl Settings {
    pub fn resolve(file: &FileConfig, flags: Overrides<'_>) -> Result<Self> {
        let defaults = RunConfig::default();
        let (d_lr, d_b1, d_b2, d_eps) = match defaults.optimizer {
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => (lr, beta1, beta2, eps),
            Optimizer::GradientDescent { lr } => (lr, 0.9, 0.999, 1e-8),
        };
        let o = &file.optimizer;
        let lr = flags.opt.lr.or(o.lr).unwrap_or(d_lr);
        let optimizer = match flags.opt.optimizer.or(o.kind).unwrap_or(OptimizerKind::Adam) {
            OptimizerKind::Adam => Optimizer::Adam {
                lr,
                beta1: o.beta1.unwrap_or(d_b1),
                beta2: o.beta2.unwrap_or(d_b2),
                eps: o.eps.unwrap_or(d_eps),
            },
            OptimizerKind::GradientDescent => Optimizer::GradientDescent { lr },
        };
        let r = &file.run;
        let run = RunConfig {
            cost_kind: flags.opt.cost_kind.or(r.cost_kind).unwrap_or(defaults.cost_kind),
            optimizer,
            max_iters: flags.opt.max_iters.or(r.max_iters).unwrap_or(defaults.max_iters),
            threshold: flags.opt.threshold.or(r.threshold).unwrap_or(defaults.threshold),
            seed: flags.opt.seed.or(r.seed).unwrap_or(defaults.seed),
        };
        run.validate().map_err(|e| UsageError(e.to_string()))?;
        let settings = Settings {
            density: flags.density.or(file.gen.density).unwrap_or(DEFAULT_DENSITY),
            gen_seed: flags.gen_seed.or(file.gen.seed).unwrap_or(0),
            run,
            restarts: flags.restarts.or(r.restarts).unwrap_or(DEFAULT_RESTARTS),
            seeds: flags.seeds.or(r.seeds).unwrap_or(1),
            threads: threads_from_env()?,
        };
        if settings.restarts == 0 || settings.seeds == 0 {
            return Err(UsageError("restarts and seeds must be at least 1".into()).into());
        }
        if !(settings.density > 0.0 && settings.density <= 1.0) {
            return Err(UsageError(format!("density {} outside (0, 1]", settings.density)).into());
        }
        Ok(settings)
    }
}

pub const THREADS_ENV: &str = "VQLS_BENCH_THREADS";

pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(UsageError(format!("{THREADS_ENV}={v} is not a positive integer")).into()),
        },
        _ => Ok(None),
    }
}
