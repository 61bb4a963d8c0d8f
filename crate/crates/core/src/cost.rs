//! Global and local VQLS costs and their gradients.
//!
//! With `|ψ⟩ = A|x(α)⟩`:
//!
//! - global: `Ĉ_G = ⟨ψ|ψ⟩ − |⟨b|ψ⟩|²`
//! - local:  `Ĉ_L = ⟨φ|φ⟩ − (1/q) Σ_j ⟨φ|(|0_j⟩⟨0_j| ⊗ I)|φ⟩` with `|φ⟩ = U_b†|ψ⟩`
//!
//! and the normalized costs divide by `⟨ψ|ψ⟩`. Both raw costs are
//! expectation values of fixed Hermitian operators in `|x(α)⟩`, which is what
//! makes the parameter-shift rule exact for them and for `⟨ψ|ψ⟩`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliDecomposition;
use crate::problem::LinearSystem;
use crate::simulator::{ansatz_state, BPrepOperator, ParamSet, StateVector};

/// Below this `⟨ψ|ψ⟩` the normalized cost is undefined.
pub const DEGENERATE_NORM: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Global,
    Local,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::Global => "global",
            CostKind::Local => "local",
        })
    }
}

impl FromStr for CostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(CostKind::Global),
            "local" => Ok(CostKind::Local),
            other => Err(Error::Config(format!("unknown cost kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub kind: CostKind,
    /// Unnormalized cost `Ĉ`.
    pub raw: f64,
    /// `Ĉ / ⟨ψ|ψ⟩`.
    pub normalized: f64,
    pub psi_norm_sq: f64,
}

impl CostReport {
    fn new(kind: CostKind, raw: f64, psi_norm_sq: f64) -> Result<Self> {
        if !(psi_norm_sq >= DEGENERATE_NORM) {
            return Err(Error::Degenerate(psi_norm_sq));
        }
        Ok(Self {
            kind,
            raw,
            normalized: raw / psi_norm_sq,
            psi_norm_sq,
        })
    }
}

/// How `A|x⟩` is formed.
#[derive(Debug, Clone, Copy, Default)]
pub enum Matvec<'a> {
    #[default]
    Dense,
    Pauli(&'a PauliDecomposition),
}

fn check_unit_rhs(sys: &LinearSystem) -> Result<()> {
    let n = linalg::norm(sys.rhs());
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(n));
    }
    Ok(())
}

fn image(sys: &LinearSystem, x: &[Complex64], matvec: Matvec<'_>) -> Result<Vec<Complex64>> {
    match matvec {
        Matvec::Dense => linalg::matvec(sys.matrix(), x),
        Matvec::Pauli(d) => d.apply(x),
    }
}

fn global_from_psi(b: &[Complex64], psi: &[Complex64]) -> Result<CostReport> {
    let overlap = linalg::inner(b, psi);
    let d = linalg::norm_sq(psi);
    // ‖ψ − ⟨b|ψ⟩ b‖² equals ⟨ψ|ψ⟩ − |⟨b|ψ⟩|² for unit b and stays nonnegative
    let raw: f64 = psi
        .iter()
        .zip(b)
        .map(|(p, bi)| (p - overlap * bi).norm_sqr())
        .sum();
    CostReport::new(CostKind::Global, raw, d)
}

fn local_from_psi(u: &BPrepOperator, psi: &[Complex64]) -> Result<CostReport> {
    let phi = u.apply_adjoint(psi)?;
    let q = u.qubits();
    let d = linalg::norm_sq(psi);
    // Σ_j (1 − Π_j) weight per amplitude is the number of one bits of k
    let raw = phi
        .iter()
        .enumerate()
        .map(|(k, z)| z.norm_sqr() * k.count_ones() as f64)
        .sum::<f64>()
        / q as f64;
    CostReport::new(CostKind::Local, raw, d)
}

/// Normalized global cost of `x`.
pub fn global_cost(sys: &LinearSystem, x: &StateVector) -> Result<CostReport> {
    check_unit_rhs(sys)?;
    let psi = image(sys, x.amplitudes(), Matvec::Dense)?;
    global_from_psi(sys.rhs(), &psi)
}

/// Normalized local cost of `x` with b-preparation operator `u`.
pub fn local_cost(sys: &LinearSystem, x: &StateVector, u: &BPrepOperator) -> Result<CostReport> {
    check_unit_rhs(sys)?;
    let psi = image(sys, x.amplitudes(), Matvec::Dense)?;
    local_from_psi(u, &psi)
}

/// A cost of one kind bound to one system, reusable across evaluations.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    sys: &'a LinearSystem,
    kind: CostKind,
    bprep: BPrepOperator,
    matvec: Matvec<'a>,
}

impl<'a> Objective<'a> {
    pub fn new(sys: &'a LinearSystem, kind: CostKind) -> Result<Self> {
        check_unit_rhs(sys)?;
        Ok(Self {
            sys,
            kind,
            bprep: BPrepOperator::build(sys.rhs())?,
            matvec: Matvec::Dense,
        })
    }

    /// Use a prebuilt b-preparation operator.
    pub fn with_bprep(sys: &'a LinearSystem, kind: CostKind, bprep: BPrepOperator) -> Result<Self> {
        check_unit_rhs(sys)?;
        if bprep.qubits() != sys.qubits() {
            return Err(Error::Dimension {
                expected: sys.qubits(),
                got: bprep.qubits(),
            });
        }
        Ok(Self {
            sys,
            kind,
            bprep,
            matvec: Matvec::Dense,
        })
    }

    /// Form `A|x⟩` from a Pauli decomposition instead of the dense matrix.
    pub fn with_matvec(mut self, matvec: Matvec<'a>) -> Self {
        self.matvec = matvec;
        self
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn system(&self) -> &LinearSystem {
        self.sys
    }

    pub fn bprep(&self) -> &BPrepOperator {
        &self.bprep
    }

    pub fn evaluate_state(&self, x: &StateVector) -> Result<CostReport> {
        self.evaluate_state_as(self.kind, x)
    }

    pub fn evaluate_state_as(&self, kind: CostKind, x: &StateVector) -> Result<CostReport> {
        let psi = image(self.sys, x.amplitudes(), self.matvec)?;
        match kind {
            CostKind::Global => global_from_psi(self.sys.rhs(), &psi),
            CostKind::Local => local_from_psi(&self.bprep, &psi),
        }
    }

    pub fn evaluate(&self, params: &ParamSet) -> Result<CostReport> {
        self.evaluate_state(&self.check_and_prepare(params)?)
    }

    fn check_and_prepare(&self, params: &ParamSet) -> Result<StateVector> {
        if params.qubits() != self.sys.qubits() {
            return Err(Error::Shape {
                expected_rows: self.sys.qubits(),
                detail: format!("{} rows", params.qubits()),
            });
        }
        Ok(ansatz_state(params))
    }

    fn shifted(&self, params: &ParamSet, qubit: usize, slot: usize, delta: f64) -> Result<CostReport> {
        let mut p = params.clone();
        p.set(qubit, slot, p.get(qubit, slot) + delta);
        self.evaluate(&p)
    }

    fn per_component<F>(&self, params: &ParamSet, f: F) -> Result<Vec<[f64; 3]>>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let q = params.qubits();
        let idx: Vec<(usize, usize)> = (0..q).flat_map(|j| (0..3).map(move |s| (j, s))).collect();
        let flat: Vec<f64> = if self.sys.dim() >= 256 {
            idx.par_iter().map(|&(j, s)| f(j, s)).collect::<Result<_>>()?
        } else {
            idx.iter().map(|&(j, s)| f(j, s)).collect::<Result<_>>()?
        };
        Ok(flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    /// Exact gradient of the normalized cost.
    ///
    /// The π/2 shift rule differentiates `Ĉ` and `⟨ψ|ψ⟩` separately; the
    /// quotient rule combines them: `∂C = (∂Ĉ·D − Ĉ·∂D) / D²`.
    pub fn gradient(&self, params: &ParamSet) -> Result<Vec<[f64; 3]>> {
        let base = self.evaluate(params)?;
        let (raw, d) = (base.raw, base.psi_norm_sq);
        self.per_component(params, |j, s| {
            let plus = self.shifted(params, j, s, FRAC_PI_2)?;
            let minus = self.shifted(params, j, s, -FRAC_PI_2)?;
            let d_raw = (plus.raw - minus.raw) / 2.0;
            let d_norm = (plus.psi_norm_sq - minus.psi_norm_sq) / 2.0;
            Ok((d_raw * d - raw * d_norm) / (d * d))
        })
    }

    /// Central finite difference of the normalized cost with step `h`.
    pub fn finite_diff_gradient(&self, params: &ParamSet, h: f64) -> Result<Vec<[f64; 3]>> {
        if h == 0.0 || !h.is_finite() {
            return Err(Error::Step);
        }
        self.check_and_prepare(params)?;
        self.per_component(params, |j, s| {
            let plus = self.shifted(params, j, s, h)?.normalized;
            let minus = self.shifted(params, j, s, -h)?.normalized;
            Ok((plus - minus) / (2.0 * h))
        })
    }
}

/// Parameter-shift gradient of the normalized cost of `kind`.
pub fn cost_gradient(
    sys: &LinearSystem,
    params: &ParamSet,
    kind: CostKind,
    u: &BPrepOperator,
) -> Result<Vec<[f64; 3]>> {
    Objective::with_bprep(sys, kind, u.clone())?.gradient(params)
}

/// Central-difference gradient, used as a test oracle.
pub fn finite_diff_gradient(
    sys: &LinearSystem,
    params: &ParamSet,
    kind: CostKind,
    u: &BPrepOperator,
    h: f64,
) -> Result<Vec<[f64; 3]>> {
    Objective::with_bprep(sys, kind, u.clone())?.finite_diff_gradient(params, h)
}
