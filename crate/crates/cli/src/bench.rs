//! Benchmark runs over a corpus and the reports built from their traces.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vqls_core::driver::{self, RunTrace};
use vqls_core::init::{self, InitStrategy, MinNormVariant};
use vqls_core::ParamSet;

use crate::config::Settings;
use crate::corpus::{self, id_hash, Manifest};
use crate::{version, Outcome, UsageError};

pub const TRACES: &str = "traces.csv";
pub const SUMMARY: &str = "summary.csv";
pub const RUN_META: &str = "run_meta.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Pca,
    Minnorm,
    Rowmean,
    Predicted,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Pca => "pca",
            Strategy::Minnorm => "minnorm",
            Strategy::Rowmean => "rowmean",
            Strategy::Predicted => "predicted",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s.trim() {
            "uniform" => Strategy::Uniform,
            "pca" => Strategy::Pca,
            "minnorm" => Strategy::Minnorm,
            "rowmean" => Strategy::Rowmean,
            "predicted" => Strategy::Predicted,
            other => {
                return Err(format!(
                    "unknown strategy {other:?} (uniform, pca, minnorm, rowmean, predicted)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SplitFilter {
    All,
    Train,
    Val,
    Test,
}

impl SplitFilter {
    fn admits(self, split: &str) -> bool {
        match self {
            SplitFilter::All => true,
            SplitFilter::Train => split == "train",
            SplitFilter::Val => split == "val",
            SplitFilter::Test => split == "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MinNormFlag {
    /// Moore-Penrose pseudoinverse.
    Pinv,
    /// Conjugate transpose.
    Adjoint,
}

pub struct RunRequest<'a> {
    pub corpus: &'a Path,
    pub strategies: &'a [Strategy],
    pub predictions: Option<&'a Path>,
    pub split: SplitFilter,
    pub minnorm: MinNormFlag,
    pub out: &'a Path,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    version: &'a str,
    corpus: String,
    strategies: Vec<&'static str>,
    predictions: Option<String>,
    split: SplitFilter,
    minnorm: MinNormFlag,
    config: &'a Settings,
    traces: usize,
    failures: Vec<String>,
}

struct Job<'a> {
    id: &'a str,
    strategy: Strategy,
    repeat: usize,
}

/// Trace-file instance key for repeat `k` of an instance.
pub fn run_key(id: &str, repeat: usize) -> String {
    format!("{id}#{repeat}")
}

pub fn run(req: RunRequest<'_>, settings: &Settings) -> Result<Outcome> {
    if req.strategies.is_empty() {
        return Err(UsageError("no strategies given".into()).into());
    }
    let wants_predicted = req.strategies.contains(&Strategy::Predicted);
    let predictions: HashMap<String, ParamSet> = match (wants_predicted, req.predictions) {
        (true, Some(p)) => init::load_predictions(p)
            .with_context(|| format!("loading predictions {}", p.display()))?,
        (true, None) => {
            return Err(UsageError("strategy `predicted` needs --predictions".into()).into())
        }
        (false, Some(_)) => {
            return Err(UsageError("--predictions given without strategy `predicted`".into()).into())
        }
        (false, None) => HashMap::new(),
    };
    let manifest = Manifest::read(req.corpus)?;
    let ids: Vec<&str> = manifest
        .instances
        .iter()
        .filter(|e| req.split.admits(&e.split))
        .map(|e| e.id.as_str())
        .collect();
    if ids.is_empty() {
        return Err(UsageError(format!("no instances in split {:?}", req.split)).into());
    }

    let systems = ids
        .par_iter()
        .map(|id| corpus::load(req.corpus, id))
        .collect::<Result<Vec<_>>>()?;
    let by_id: HashMap<&str, _> = ids.iter().copied().zip(&systems).collect();

    let mut jobs = Vec::new();
    for &strategy in req.strategies {
        for &id in &ids {
            for repeat in 0..settings.seeds {
                jobs.push(Job { id, strategy, repeat });
            }
        }
    }
    let variant = match req.minnorm {
        MinNormFlag::Pinv => MinNormVariant::Pseudoinverse,
        MinNormFlag::Adjoint => MinNormVariant::ConjugateTranspose,
    };
    let results: Vec<std::result::Result<RunTrace, String>> = jobs
        .par_iter()
        .map(|job| {
            let sys = by_id[job.id];
            let p0 = match job.strategy {
                Strategy::Uniform => {
                    let seed = vqls_core::seed::derive(
                        settings.run.seed,
                        &[id_hash(job.id), job.repeat as u64],
                    );
                    InitStrategy::Uniform { seed }.initialize(sys)
                }
                Strategy::Pca => InitStrategy::Pca.initialize(sys),
                Strategy::Minnorm => InitStrategy::MinNorm(variant).initialize(sys),
                Strategy::Rowmean => InitStrategy::RowMean.initialize(sys),
                Strategy::Predicted => predictions
                    .get(job.id)
                    .cloned()
                    .ok_or_else(|| vqls_core::Error::MissingId(job.id.to_string()))
                    .and_then(|p| {
                        if p.qubits() == sys.qubits() {
                            Ok(p)
                        } else {
                            Err(vqls_core::Error::Shape {
                                expected_rows: sys.qubits(),
                                detail: format!("{} rows", p.qubits()),
                            })
                        }
                    }),
            };
            let key = run_key(job.id, job.repeat);
            p0.and_then(|p0| driver::optimize(sys, p0, &settings.run))
                .map(|t| t.tagged(job.strategy.tag()).with_instance(key.clone()))
                .map_err(|e| {
                    let kind = if e.is_degenerate() { "degenerate cost" } else { "error" };
                    format!("{} {key}: {kind}: {e}", job.strategy.tag())
                })
        })
        .collect();

    let mut traces = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(t) => traces.push(t),
            Err(e) => failures.push(e),
        }
    }
    traces.sort_by(|a, b| (&a.strategy, &a.instance).cmp(&(&b.strategy, &b.instance)));

    fs::create_dir_all(req.out).with_context(|| format!("creating {}", req.out.display()))?;
    let write = |name: &str, f: &dyn Fn(BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
        let path = req.out.join(name);
        let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
        f(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
    };
    write(TRACES, &|w| driver::write_traces_csv(w, &traces))?;
    let summary = if traces.is_empty() {
        vec![]
    } else {
        driver::summarize(&traces)
    };
    write(SUMMARY, &|w| driver::write_summary_csv(w, &summary))?;
    let meta = RunMeta {
        version: version(),
        corpus: req.corpus.display().to_string(),
        strategies: req.strategies.iter().map(|s| s.tag()).collect(),
        predictions: req.predictions.map(|p| p.display().to_string()),
        split: req.split,
        minnorm: req.minnorm,
        config: settings,
        traces: traces.len(),
        failures: failures.clone(),
    };
    fs::write(req.out.join(RUN_META), serde_json::to_string_pretty(&meta)? + "\n")?;

    eprintln!("wrote {} traces to {}", traces.len(), req.out.display());
    if failures.is_empty() {
        Ok(Outcome::Success)
    } else {
        for f in &failures {
            eprintln!("failed: {f}");
        }
        Ok(Outcome::Partial)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRow {
    pub instance: String,
    pub strategy: String,
    pub qubits: usize,
    pub iter: usize,
    pub cost: f64,
    pub wall_ms: f64,
}

/// One run's cost series rebuilt from trace rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub instance: String,
    pub strategy: String,
    pub qubits: usize,
    pub costs: Vec<f64>,
}

pub fn read_traces(path: &Path) -> Result<Vec<Series>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out: Vec<Series> = Vec::new();
    for (line, row) in reader.deserialize::<TraceRow>().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 2))?;
        match out.last_mut() {
            Some(s) if s.instance == row.instance && s.strategy == row.strategy && row.iter > 0 => {
                if row.iter != s.costs.len() {
                    anyhow::bail!("{} row {}: iteration {} out of order", path.display(), line + 2, row.iter);
                }
                s.costs.push(row.cost);
            }
            _ => {
                if row.iter != 0 {
                    anyhow::bail!("{} row {}: series starts at iteration {}", path.display(), line + 2, row.iter);
                }
                out.push(Series {
                    instance: row.instance,
                    strategy: row.strategy,
                    qubits: row.qubits,
                    costs: vec![row.cost],
                });
            }
        }
    }
    Ok(out)
}

fn lower_median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(driver::quantile_lower(&v, 0.5))
}

/// `1 − median_a / median_b`.
pub fn step_reduction(median_a: f64, median_b: f64) -> Option<f64> {
    (median_b > 0.0).then(|| 1.0 - median_a / median_b)
}

/// Per-iteration mean and population standard deviation. Runs that stopped
/// early contribute their last cost to later iterations.
pub fn mean_std_series(runs: &[&Series]) -> Vec<(f64, f64)> {
    let len = runs.iter().map(|s| s.costs.len()).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let vals: Vec<f64> = runs
                .iter()
                .map(|s| s.costs[i.min(s.costs.len() - 1)])
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        })
        .collect()
}

#[derive(Serialize)]
struct ReportMeta<'a> {
    version: &'a str,
    runs: String,
    baseline: &'a str,
    threshold: f64,
    files: Vec<String>,
    run_config: serde_json::Value,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn report(runs: &Path, out: &Path, baseline: &str) -> Result<Outcome> {
    let meta_path = runs.join(RUN_META);
    let run_meta: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?,
    )?;
    let threshold = run_meta["config"]["run"]["threshold"]
        .as_f64()
        .with_context(|| format!("{} lacks config.run.threshold", meta_path.display()))?;
    let series = read_traces(&runs.join(TRACES))?;

    let mut groups: BTreeMap<(usize, &str), Vec<&Series>> = BTreeMap::new();
    for s in &series {
        groups.entry((s.qubits, s.strategy.as_str())).or_default().push(s);
    }
    let qubit_counts: Vec<usize> = {
        let mut q: Vec<usize> = groups.keys().map(|k| k.0).collect();
        q.dedup();
        q
    };
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    let mut create = |name: String| -> Result<csv::Writer<File>> {
        let path = out.join(&name);
        files.push(name);
        csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))
    };

    for &q in &qubit_counts {
        let mut w = create(format!("initial_loss_q{q}.csv"))?;
        w.write_record(["strategy", "instance", "initial_cost"])?;
        for ((_, strategy), runs) in groups.range((q, "")..(q + 1, "")) {
            let mut rows: Vec<&&Series> = runs.iter().collect();
            rows.sort_by(|a, b| a.instance.cmp(&b.instance));
            for s in rows {
                w.write_record([strategy, s.instance.as_str(), &s.costs[0].to_string()])?;
            }
        }
        w.flush()?;

        let mut w = create(format!("convergence_q{q}.csv"))?;
        w.write_record(["strategy", "iter", "mean", "std", "n"])?;
        for ((_, strategy), runs) in groups.range((q, "")..(q + 1, "")) {
            for (i, (mean, std)) in mean_std_series(runs).into_iter().enumerate() {
                w.write_record([
                    strategy.to_string(),
                    i.to_string(),
                    mean.to_string(),
                    std.to_string(),
                    runs.len().to_string(),
                ])?;
            }
        }
        w.flush()?;
    }

    let mut w = create("steps_reduction.csv".into())?;
    w.write_record([
        "qubits",
        "strategy",
        "baseline",
        "median_steps",
        "baseline_median_steps",
        "reduction",
    ])?;
    let median_steps = |runs: &[&Series]| {
        lower_median(
            runs.iter()
                .filter_map(|s| driver::steps_to_threshold(&s.costs, threshold))
                .map(|k| k as f64)
                .collect(),
        )
    };
    for &q in &qubit_counts {
        let Some(base_runs) = groups.get(&(q, baseline)) else {
            continue;
        };
        let base = median_steps(base_runs);
        for ((_, strategy), runs) in groups.range((q, "")..(q + 1, "")) {
            if *strategy == baseline {
                continue;
            }
            let m = median_steps(runs);
            let red = m.zip(base).and_then(|(a, b)| step_reduction(a, b));
            w.write_record([
                q.to_string(),
                strategy.to_string(),
                baseline.to_string(),
                fmt_opt(m),
                fmt_opt(base),
                fmt_opt(red),
            ])?;
        }
    }
    w.flush()?;

    let meta = ReportMeta {
        version: version(),
        runs: runs.display().to_string(),
        baseline,
        threshold,
        files: files.clone(),
        run_config: run_meta["config"].clone(),
    };
    fs::write(out.join("report_meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    eprintln!("wrote {} report files to {}", files.len(), out.display());
    Ok(Outcome::Success)
}

/// Parse `uniform,minnorm` style lists.
pub fn parse_strategies(s: &str) -> std::result::Result<Vec<Strategy>, String> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let st: Strategy = part.parse()?;
        if out.contains(&st) {
            return Err(format!("strategy {} listed twice", st.tag()));
        }
        out.push(st);
    }
    Ok(out)
}
