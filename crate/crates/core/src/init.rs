//! Initial parameter strategies.
//!
//! Classical baselines turn a vector derived from the instance (principal
//! component, row means, minimum-norm solution) into `q × 3` angles. The maps
//! used here are fixed conventions:
//!
//! - `pca`, `rowmean`: take `3q` values (cycling when `N < 3q`), then map
//!   `[min, max]` affinely onto `[0, 2π)`; a constant vector maps to all `π`.
//! - `minnorm`: fit each qubit's reduced state of the normalized solution by
//!   the closest real single-qubit state `Ry(θ_j)|0⟩`, placing `θ_j` in slot 0
//!   and zeros elsewhere, which makes the ansatz a product state.
//! - `predicted`: angles read from a predictions file, reduced mod `2π`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ZERO};
use crate::problem::LinearSystem;
use crate::seed;
use crate::simulator::{wrap_angle, ParamSet};

/// Upper end of the affine angle map; strictly below `2π`.
pub const ANGLE_SPAN: f64 = TAU * (1.0 - f64::EPSILON);

/// Relative singular-value cutoff of the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MinNormVariant {
    /// `A⁺ b`.
    #[default]
    Pseudoinverse,
    /// `A† b`.
    ConjugateTranspose,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitStrategy {
    Uniform { seed: u64 },
    Pca,
    MinNorm(MinNormVariant),
    RowMean,
    Predicted(PathBuf),
}

impl InitStrategy {
    /// Tag used in every output file.
    pub fn tag(&self) -> &'static str {
        match self {
            InitStrategy::Uniform { .. } => "uniform",
            InitStrategy::Pca => "pca",
            InitStrategy::MinNorm(_) => "minnorm",
            InitStrategy::RowMean => "rowmean",
            InitStrategy::Predicted(_) => "predicted",
        }
    }

    pub fn initialize(&self, sys: &LinearSystem) -> Result<ParamSet> {
        match self {
            InitStrategy::Uniform { seed } => Ok(init_uniform(sys.qubits(), *seed)),
            InitStrategy::Pca => init_pca(sys),
            InitStrategy::MinNorm(v) => init_minnorm_with(sys, *v),
            InitStrategy::RowMean => Ok(init_rowmean(sys)),
            InitStrategy::Predicted(path) => {
                let p = load_predicted(path, sys.id())?;
                if p.qubits() != sys.qubits() {
                    return Err(Error::Shape {
                        expected_rows: sys.qubits(),
                        detail: format!("{} rows", p.qubits()),
                    });
                }
                Ok(p)
            }
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Angles i.i.d. uniform in `[0, 2π)`.
pub fn init_uniform(qubits: usize, seed: u64) -> ParamSet {
    let mut rng = seed::rng(seed);
    let rows = (0..qubits.max(1))
        .map(|_| [0; 3].map(|_| rng.gen_range(0.0..TAU)))
        .collect();
    ParamSet::new(rows).expect("finite angles")
}

/// Map values affinely from `[min, max]` onto `[0, ANGLE_SPAN]`.
pub fn affine_to_angles(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let scale = lo.abs().max(hi.abs());
    if !(span > 1e-12 * scale) {
        return vec![PI; values.len()];
    }
    values
        .iter()
        .map(|v| ((v - lo) / span * ANGLE_SPAN).clamp(0.0, ANGLE_SPAN))
        .collect()
}

fn take_cycled(v: &[f64], count: usize) -> Vec<f64> {
    (0..count).map(|i| v[i % v.len()]).collect()
}

fn real_part(sys: &LinearSystem) -> DMatrix<f64> {
    sys.matrix().map(|z| z.re)
}

/// Leading right singular vector of `Re(A)`, angle-mapped.
pub fn init_pca(sys: &LinearSystem) -> Result<ParamSet> {
    let re = real_part(sys);
    if re.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let svd = re.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let lead = svd.singular_values.argmax().0;
    let mut v: Vec<f64> = v_t.row(lead).iter().copied().collect();
    // sign convention: the largest-magnitude entry (first on ties) is positive
    let pivot = v
        .iter()
        .enumerate()
        .fold(0, |best, (i, x)| if x.abs() > v[best].abs() { i } else { best });
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let q = sys.qubits();
    let angles = affine_to_angles(&take_cycled(&v, 3 * q));
    ParamSet::from_flat(q, &angles)
}

/// Row means of `Re(A)` averaged over `3q` contiguous blocks, angle-mapped.
pub fn init_rowmean(sys: &LinearSystem) -> ParamSet {
    let re = real_part(sys);
    let n = sys.dim();
    let q = sys.qubits();
    let means: Vec<f64> = (0..n).map(|i| re.row(i).sum() / n as f64).collect();
    let blocks = 3 * q;
    let averages = if n >= blocks {
        (0..blocks)
            .map(|b| {
                let (start, end) = (b * n / blocks, (b + 1) * n / blocks);
                means[start..end].iter().sum::<f64>() / (end - start) as f64
            })
            .collect()
    } else {
        take_cycled(&means, blocks)
    };
    ParamSet::from_flat(q, &affine_to_angles(&averages)).expect("3q finite angles")
}

pub fn init_minnorm(sys: &LinearSystem) -> Result<ParamSet> {
    init_minnorm_with(sys, MinNormVariant::Pseudoinverse)
}

/// Bloch vector `(r_x, r_y, r_z)` of qubit `j`'s reduced state.
pub fn bloch_vector(x: &[Complex64], qubits: usize, j: usize) -> [f64; 3] {
    let stride = 1usize << (qubits - 1 - j);
    let (mut p0, mut p1, mut coh) = (0.0, 0.0, ZERO);
    for k in (0..x.len()).filter(|k| k & stride == 0) {
        let (a0, a1) = (x[k], x[k | stride]);
        p0 += a0.norm_sqr();
        p1 += a1.norm_sqr();
        // ρ_10 = Σ a1 · conj(a0)
        coh += a1 * a0.conj();
    }
    [2.0 * coh.re, 2.0 * coh.im, p0 - p1]
}

pub fn init_minnorm_with(sys: &LinearSystem, variant: MinNormVariant) -> Result<ParamSet> {
    let mut x = match variant {
        MinNormVariant::Pseudoinverse => linalg::pinv_apply(sys.matrix(), sys.rhs(), PINV_CUTOFF)?,
        MinNormVariant::ConjugateTranspose => {
            linalg::matvec(&sys.matrix().adjoint(), sys.rhs())?
        }
    };
    if linalg::norm(&x) < 1e-14 {
        return Err(Error::OutsideRange);
    }
    linalg::normalize(&mut x);
    let q = sys.qubits();
    let rows = (0..q)
        .map(|j| {
            let [rx, _ry, rz] = bloch_vector(&x, q, j);
            // closest real state Ry(θ)|0⟩ has Bloch vector (sin θ, 0, cos θ)
            [wrap_angle(rx.atan2(rz)), 0.0, 0.0]
        })
        .collect();
    ParamSet::new(rows)
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRecord {
    id: String,
    qubits: usize,
    params: Vec<Vec<f64>>,
}

fn record_to_params(rec: PredictionRecord) -> Result<(String, ParamSet)> {
    let shape_err = |detail: String| Error::Shape {
        expected_rows: rec.qubits,
        detail,
    };
    if rec.params.len() != rec.qubits {
        return Err(shape_err(format!("{} rows", rec.params.len())));
    }
    let mut rows = Vec::with_capacity(rec.qubits);
    for row in &rec.params {
        if row.len() != 3 {
            return Err(shape_err(format!("a row of {} columns", row.len())));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        rows.push([row[0], row[1], row[2]].map(wrap_angle));
    }
    Ok((rec.id, ParamSet::new(rows)?))
}

/// Parse a predictions JSON Lines file into `id → ParamSet`.
pub fn load_predictions(path: &Path) -> Result<HashMap<String, ParamSet>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        let (id, params) = record_to_params(rec)?;
        if out.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        out.insert(id, params);
    }
    Ok(out)
}

/// Predicted angles for one instance.
pub fn load_predicted(path: &Path, instance_id: &str) -> Result<ParamSet> {
    load_predictions(path)?
        .remove(instance_id)
        .ok_or_else(|| Error::MissingId(instance_id.into()))
}

/// One predictions line in the exchange format.
pub fn prediction_line(id: &str, params: &ParamSet) -> Result<String> {
    Ok(serde_json::to_string(&PredictionRecord {
        id: id.into(),
        qubits: params.qubits(),
        params: params.rows().iter().map(|r| r.to_vec()).collect(),
    })?)
}
