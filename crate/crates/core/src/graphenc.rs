//! Signed directed graph encoding of `(A, b)` and the dataset JSONL format.
//!
//! Node `i` carries `b_i`; every nonzero `a_ij` becomes a directed edge
//! `i → j` whose signed weight is `a_ij` itself, so `sign(a_ij)` gives the
//! adjacency entry `g_ij` and `|a_ij|` the edge magnitude. Diagonal entries
//! become self-loops. For complex entries the sign is taken from the real
//! part, falling back to the imaginary part when the real part is zero.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};
use crate::problem::{LinearSystem, SystemMeta};
use crate::simulator::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// `a_ij` as `[re, im]`.
    pub weight: [f64; 2],
}

impl Edge {
    /// Adjacency sign `g_ij ∈ {+1, −1}`.
    pub fn sign(&self) -> i8 {
        let [re, im] = self.weight;
        let key = if re != 0.0 { re } else { im };
        if key > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn magnitude(&self) -> f64 {
        Complex64::new(self.weight[0], self.weight[1]).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedDirectedGraph {
    /// Node features `b_i` as `[re, im]`.
    pub nodes: Vec<[f64; 2]>,
    /// Edges sorted by `(src, dst)`.
    pub edges: Vec<Edge>,
}

impl SignedDirectedGraph {
    pub fn positive_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.sign() > 0).count()
    }

    pub fn negative_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.sign() < 0).count()
    }
}

pub fn encode(sys: &LinearSystem) -> SignedDirectedGraph {
    let nodes = sys.rhs().iter().map(|z| [z.re, z.im]).collect();
    let n = sys.dim();
    let a = sys.matrix();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = a[(i, j)];
            if v != ZERO {
                edges.push(Edge {
                    src: i,
                    dst: j,
                    weight: [v.re, v.im],
                });
            }
        }
    }
    SignedDirectedGraph { nodes, edges }
}

/// Matrix and right-hand side described by a graph.
pub fn decode_structure(g: &SignedDirectedGraph, dim: usize) -> Result<(CMatrix, Vec<Complex64>)> {
    if g.nodes.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: g.nodes.len(),
        });
    }
    let mut a = CMatrix::zeros(dim, dim);
    for e in &g.edges {
        if e.src >= dim || e.dst >= dim {
            return Err(Error::EdgeIndex(e.src, e.dst, dim));
        }
        a[(e.src, e.dst)] = Complex64::new(e.weight[0], e.weight[1]);
    }
    let b = g.nodes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    Ok((a, b))
}

/// Rebuild a validated system from a graph.
pub fn decode_system(
    g: &SignedDirectedGraph,
    id: &str,
    meta: SystemMeta,
) -> Result<LinearSystem> {
    let (a, b) = decode_structure(g, g.nodes.len())?;
    LinearSystem::new(id, a, b, meta)
}

/// Training metadata attached to a record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub split: Option<String>,
    pub source: Option<String>,
    pub init_cost: Option<f64>,
    pub final_cost: Option<f64>,
    pub steps: Option<usize>,
    pub converged: Option<bool>,
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub id: String,
    pub qubits: usize,
    pub graph: SignedDirectedGraph,
    pub label: Option<ParamSet>,
    pub meta: RecordMeta,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    qubits: usize,
    nodes: Vec<[f64; 2]>,
    edges: Vec<(usize, usize, f64, f64)>,
    label: Option<Vec<f64>>,
    meta: RecordMeta,
}

impl DatasetRecord {
    pub fn new(sys: &LinearSystem, label: Option<ParamSet>, meta: RecordMeta) -> Self {
        Self {
            id: sys.id().to_string(),
            qubits: sys.qubits(),
            graph: encode(sys),
            label,
            meta,
        }
    }

    pub fn to_line(&self) -> Result<String> {
        let mut edges: Vec<_> = self
            .graph
            .edges
            .iter()
            .map(|e| (e.src, e.dst, e.weight[0], e.weight[1]))
            .collect();
        edges.sort_by_key(|e| (e.0, e.1));
        Ok(serde_json::to_string(&RecordLine {
            id: self.id.clone(),
            qubits: self.qubits,
            nodes: self.graph.nodes.clone(),
            edges,
            label: self.label.as_ref().map(ParamSet::flatten),
            meta: self.meta.clone(),
        })?)
    }

    fn from_line(line: RecordLine) -> Result<Self> {
        let dim = 1usize << line.qubits;
        if line.nodes.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: line.nodes.len(),
            });
        }
        let edges = line
            .edges
            .into_iter()
            .map(|(src, dst, re, im)| {
                if src >= dim || dst >= dim {
                    return Err(Error::EdgeIndex(src, dst, dim));
                }
                Ok(Edge {
                    src,
                    dst,
                    weight: [re, im],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let label = line
            .label
            .map(|flat| ParamSet::from_flat(line.qubits, &flat))
            .transpose()?;
        Ok(Self {
            id: line.id,
            qubits: line.qubits,
            graph: SignedDirectedGraph {
                nodes: line.nodes,
                edges,
            },
            label,
            meta: line.meta,
        })
    }
}

/// Write records as JSON Lines. Fails on duplicate ids.
pub fn export_dataset(records: &[DatasetRecord], path: &Path) -> Result<()> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for r in records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
        out.extend_from_slice(r.to_line()?.as_bytes());
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&out).map_err(|e| Error::io(path, e))
}

pub fn import_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at_line = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg,
        };
        let raw: RecordLine = serde_json::from_str(line).map_err(|e| at_line(e.to_string()))?;
        let rec = DatasetRecord::from_line(raw).map_err(|e| at_line(e.to_string()))?;
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        records.push(rec);
    }
    Ok(records)
}
