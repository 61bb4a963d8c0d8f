//! Hybrid optimization loop, traces, labels and summary statistics.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cost::{CostKind, Objective};
use crate::error::{Error, Result};
use crate::init::init_uniform;
use crate::linalg;
use crate::problem::LinearSystem;
use crate::seed;
use crate::simulator::{ansatz_state, ParamSet};

/// Default convergence threshold on the tracked cost.
pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const DEFAULT_MAX_ITERS: usize = 800;
pub const DEFAULT_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
    GradientDescent {
        lr: f64,
    },
}

impl Optimizer {
    pub fn adam(lr: f64) -> Self {
        Optimizer::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            Optimizer::Adam { lr, .. } | Optimizer::GradientDescent { lr } => lr,
        }
    }
}

impl Default for Optimizer {
    fn default() -> Self {
        Self::adam(0.05)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub cost_kind: CostKind,
    pub optimizer: Optimizer,
    pub max_iters: usize,
    /// Convergence threshold γ on the normalized cost.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cost_kind: CostKind::Local,
            optimizer: Optimizer::default(),
            max_iters: DEFAULT_MAX_ITERS,
            threshold: DEFAULT_THRESHOLD,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold {} must lie in (0, 1)",
                self.threshold
            )));
        }
        let lr = self.optimizer.lr();
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {lr} must be positive")));
        }
        if let Optimizer::Adam { beta1, beta2, eps, .. } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(eps > 0.0) {
                return Err(Error::Config("adam needs β1, β2 in [0, 1) and ε > 0".into()));
            }
        }
        Ok(())
    }
}

/// One optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub instance: String,
    pub strategy: String,
    pub qubits: usize,
    pub cost_kind: CostKind,
    /// Normalized cost per iteration; index 0 is the initial cost.
    pub costs: Vec<f64>,
    /// Wall-clock milliseconds spent producing each entry of `costs`.
    pub wall_ms: Vec<f64>,
    pub final_params: ParamSet,
    /// First index with cost below the threshold.
    pub converged_at: Option<usize>,
    /// The other cost kind evaluated at the final parameters.
    pub final_companion_cost: f64,
}

impl RunTrace {
    pub fn initial_cost(&self) -> f64 {
        self.costs[0]
    }

    pub fn final_cost(&self) -> f64 {
        *self.costs.last().expect("trace holds the initial cost")
    }

    pub fn total_ms(&self) -> f64 {
        self.wall_ms.iter().sum()
    }

    pub fn tagged(mut self, strategy: impl Into<String>) -> Self {
        self.strategy = strategy.into();
        self
    }

    pub fn with_instance(mut self, instance: impl Into<String>) -> Self {
        self.instance = instance.into();
        self
    }
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn at_iter(iter: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::AtIteration {
        iter,
        source: Box::new(e),
    }
}

/// Minimize the configured cost from `p0`.
///
/// Stops after `max_iters` updates or as soon as the cost drops below the
/// threshold (which may already hold at index 0). Deterministic in its inputs.
pub fn optimize(sys: &LinearSystem, p0: ParamSet, cfg: &RunConfig) -> Result<RunTrace> {
    cfg.validate()?;
    let objective = Objective::new(sys, cfg.cost_kind)?;
    let n_params = 3 * sys.qubits();

    let start = Instant::now();
    let mut params = p0;
    let mut costs = vec![objective.evaluate(&params).map_err(at_iter(0))?.normalized];
    let mut wall_ms = vec![elapsed_ms(start)];
    let mut converged_at = (costs[0] < cfg.threshold).then_some(0);

    let mut adam = AdamState {
        m: vec![0.0; n_params],
        v: vec![0.0; n_params],
        t: 0,
    };
    let mut iter = 0;
    while converged_at.is_none() && iter < cfg.max_iters {
        iter += 1;
        let start = Instant::now();
        let grad: Vec<f64> = objective
            .gradient(&params)
            .map_err(at_iter(iter))?
            .into_iter()
            .flatten()
            .collect();
        let mut flat = params.flatten();
        match cfg.optimizer {
            Optimizer::GradientDescent { lr } => {
                for (p, g) in flat.iter_mut().zip(&grad) {
                    *p -= lr * g;
                }
            }
            Optimizer::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                adam.t += 1;
                let c1 = 1.0 - beta1.powi(adam.t);
                let c2 = 1.0 - beta2.powi(adam.t);
                for (k, g) in grad.iter().enumerate() {
                    adam.m[k] = beta1 * adam.m[k] + (1.0 - beta1) * g;
                    adam.v[k] = beta2 * adam.v[k] + (1.0 - beta2) * g * g;
                    let m_hat = adam.m[k] / c1;
                    let v_hat = adam.v[k] / c2;
                    flat[k] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        params = ParamSet::from_flat(sys.qubits(), &flat).map_err(at_iter(iter))?;
        let cost = objective.evaluate(&params).map_err(at_iter(iter))?.normalized;
        costs.push(cost);
        wall_ms.push(elapsed_ms(start));
        if cost < cfg.threshold {
            converged_at = Some(iter);
        }
    }

    let other = match cfg.cost_kind {
        CostKind::Global => CostKind::Local,
        CostKind::Local => CostKind::Global,
    };
    let final_companion_cost = objective
        .evaluate_state_as(other, &ansatz_state(&params))
        .map_err(at_iter(iter))?
        .normalized;
    Ok(RunTrace {
        instance: sys.id().to_string(),
        strategy: String::new(),
        qubits: sys.qubits(),
        cost_kind: cfg.cost_kind,
        costs,
        wall_ms,
        final_params: params,
        converged_at,
        final_companion_cost,
    })
}

/// First index whose cost is below `threshold`.
pub fn steps_to_threshold(costs: &[f64], threshold: f64) -> Option<usize> {
    costs.iter().position(|&c| c < threshold)
}

/// `|⟨x̂|x(α)⟩|²` against the normalized classical solution `x̂ = A⁻¹b / ‖A⁻¹b‖`.
pub fn solution_fidelity(sys: &LinearSystem, params: &ParamSet) -> Result<f64> {
    let cond = linalg::condition(sys.matrix());
    if !(cond <= 1e12) {
        return Err(Error::Singular(cond));
    }
    let mut x = linalg::solve(sys.matrix(), sys.rhs())?;
    linalg::normalize(&mut x);
    let state = ansatz_state(params);
    Ok(linalg::inner(&x, state.amplitudes()).norm_sqr().min(1.0))
}

/// Best-of-restarts optimized parameters for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub params: ParamSet,
    pub init_cost: f64,
    pub final_cost: f64,
    pub steps: Option<usize>,
    pub converged: bool,
    pub restarts: usize,
    /// Final cost of every restart that finished, in restart order.
    pub restart_costs: Vec<f64>,
}

/// Seed of restart `r` for a base seed; prefixes are shared across restart counts.
pub fn restart_seed(base: u64, restart: usize) -> u64 {
    seed::derive(base, &[restart as u64])
}

/// Run `restarts` uniform-random starts and keep the lowest final cost.
pub fn label_instance(
    sys: &LinearSystem,
    cfg: &RunConfig,
    restarts: usize,
    base_seed: u64,
) -> Result<Label> {
    if restarts < 1 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    let mut best: Option<RunTrace> = None;
    let mut restart_costs = Vec::with_capacity(restarts);
    let mut last_err = None;
    for r in 0..restarts {
        let p0 = init_uniform(sys.qubits(), restart_seed(base_seed, r));
        match optimize(sys, p0, cfg) {
            Ok(trace) => {
                restart_costs.push(trace.final_cost());
                if best
                    .as_ref()
                    .is_none_or(|b| trace.final_cost() < b.final_cost())
                {
                    best = Some(trace);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let best = match best {
        Some(b) => b,
        None => {
            let e = last_err.expect("at least one restart ran");
            return Err(Error::AllRestartsFailed(restarts, Box::new(e)));
        }
    };
    Ok(Label {
        init_cost: best.initial_cost(),
        final_cost: best.final_cost(),
        steps: best.converged_at,
        converged: best.converged_at.is_some(),
        params: best.final_params,
        restarts,
        restart_costs,
    })
}

/// Lower-interpolation quantile of sorted data: element `floor(p·(n−1))`.
pub fn quantile_lower(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let idx = (p * (sorted.len() - 1) as f64).floor() as usize;
    sorted[idx]
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub qubits: usize,
    pub n: usize,
    pub median_init: f64,
    pub q1_init: f64,
    pub q3_init: f64,
    pub median_final: f64,
    /// Median steps among converged runs.
    pub median_steps: Option<f64>,
    pub converge_rate: f64,
    /// Mean total wall-clock milliseconds per run.
    pub mean_ms: f64,
}

/// Per-(strategy, qubits) statistics, sorted by strategy then qubit count.
pub fn summarize(traces: &[RunTrace]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(&str, usize), Vec<&RunTrace>> = BTreeMap::new();
    for t in traces {
        groups.entry((t.strategy.as_str(), t.qubits)).or_default().push(t);
    }
    groups
        .into_iter()
        .map(|((strategy, qubits), ts)| {
            let n = ts.len();
            let init = sorted(ts.iter().map(|t| t.initial_cost()).collect());
            let fin = sorted(ts.iter().map(|t| t.final_cost()).collect());
            let steps = sorted(
                ts.iter()
                    .filter_map(|t| t.converged_at.map(|s| s as f64))
                    .collect(),
            );
            SummaryRow {
                strategy: strategy.to_string(),
                qubits,
                n,
                median_init: quantile_lower(&init, 0.5),
                q1_init: quantile_lower(&init, 0.25),
                q3_init: quantile_lower(&init, 0.75),
                median_final: quantile_lower(&fin, 0.5),
                median_steps: (!steps.is_empty()).then(|| quantile_lower(&steps, 0.5)),
                converge_rate: steps.len() as f64 / n as f64,
                mean_ms: ts.iter().map(|t| t.total_ms()).sum::<f64>() / n as f64,
            }
        })
        .collect()
}

pub const TRACE_HEADER: &str = "instance,strategy,qubits,iter,cost,wall_ms";
pub const SUMMARY_HEADER: &str =
    "strategy,qubits,n,median_init,q1_init,q3_init,median_final,median_steps,converge_rate,mean_ms";

/// Trace rows, one per recorded iteration.
pub fn write_traces_csv<W: Write>(mut w: W, traces: &[RunTrace]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for t in traces {
        for (i, (c, ms)) in t.costs.iter().zip(&t.wall_ms).enumerate() {
            writeln!(w, "{},{},{},{},{},{:.3}", t.instance, t.strategy, t.qubits, i, c, ms)?;
        }
    }
    Ok(())
}

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        let steps = r.median_steps.map_or_else(|| "NA".to_string(), |s| s.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            r.strategy,
            r.qubits,
            r.n,
            r.median_init,
            r.q1_init,
            r.q3_init,
            r.median_final,
            steps,
            r.converge_rate,
            r.mean_ms
        )?;
    }
    Ok(())
}
