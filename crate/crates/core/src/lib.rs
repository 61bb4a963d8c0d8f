//! Desk-scale laboratory for variational quantum linear solvers (VQLS).
//!
//! A linear system `A x = b` with `dim A = 2^q` is attacked by preparing a
//! parameterized state `|x(α)⟩ = V(α)|0⟩` and minimizing a cost that vanishes
//! when `A|x(α)⟩ ∝ |b⟩`. The crate covers the whole classical side of that
//! loop:
//!
//! - [`problem`]: generation, Matrix Market ingestion, normalization and splits
//! - [`pauli`]: decomposition of `A` into Pauli strings and term-wise application
//! - [`simulator`]: exact statevector simulation of the ansatz and of `U_b`
//! - [`cost`]: global and local costs with parameter-shift gradients
//! - [`init`]: baseline initializers and loading of learned predictions
//! - [`graphenc`]: signed directed graph encoding and dataset JSONL
//! - [`driver`]: optimization loop, traces, labels and summary statistics

pub mod cost;
pub mod driver;
pub mod error;
pub mod graphenc;
pub mod init;
pub mod linalg;
pub mod mtx;
pub mod pauli;
pub mod problem;
pub mod seed;
pub mod simulator;

pub use num_complex::Complex64;

pub use cost::{CostKind, CostReport};
pub use driver::{Optimizer, RunConfig, RunTrace};
pub use error::{Error, Result};
pub use graphenc::{DatasetRecord, SignedDirectedGraph};
pub use init::InitStrategy;
pub use pauli::{PauliDecomposition, PauliString};
pub use problem::{DatasetSplit, LinearSystem};
pub use simulator::{BPrepOperator, ParamSet, StateVector};

/// Largest supported qubit count (dimension 4096).
pub const MAX_QUBITS: usize = 12;
