//! Pauli-string decomposition `A = Σ_l c_l P_l`.
//!
//! A Pauli string on `q` qubits is stored as a pair of bit masks `(x, z)`:
//! `x` marks X/Y positions, `z` marks Y/Z positions. Qubit 0 is the leftmost
//! label character and the most significant bit of an amplitude index. With
//! that encoding `P|c⟩ = i^{|x∧z|} (−1)^{|c∧z|} |c ⊕ x⟩`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ZERO};

/// Default magnitude below which coefficients are dropped.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    qubits: usize,
    x: u32,
    z: u32,
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub fn from_masks(qubits: usize, x: u32, z: u32) -> Self {
        debug_assert!(qubits <= 16 && (x | z) >> qubits == 0);
        Self { qubits, x, z }
    }

    pub fn identity(qubits: usize) -> Self {
        Self::from_masks(qubits, 0, 0)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn masks(&self) -> (u32, u32) {
        (self.x, self.z)
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    fn base_phase(&self) -> Complex64 {
        i_pow((self.x & self.z).count_ones())
    }

    /// `P v` in `O(N)`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = 1usize << self.qubits;
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        let mut out = vec![ZERO; n];
        self.accumulate(Complex64::new(1.0, 0.0), v, &mut out);
        Ok(out)
    }

    /// `out += coeff · P v` (lengths already checked).
    fn accumulate(&self, coeff: Complex64, v: &[Complex64], out: &mut [Complex64]) {
        let base = coeff * self.base_phase();
        let (x, z) = (self.x as usize, self.z as usize);
        for (c, vc) in v.iter().enumerate() {
            let term = if (c & z).count_ones() % 2 == 0 {
                base * vc
            } else {
                -base * vc
            };
            out[c ^ x] += term;
        }
    }

    /// Dense `2^q × 2^q` matrix of the string.
    pub fn to_matrix(&self) -> CMatrix {
        let n = 1usize << self.qubits;
        let mut m = CMatrix::zeros(n, n);
        add_scaled(&mut m, *self, Complex64::new(1.0, 0.0));
        m
    }
}

fn add_scaled(m: &mut CMatrix, p: PauliString, coeff: Complex64) {
    let base = coeff * p.base_phase();
    let (x, z) = (p.x as usize, p.z as usize);
    for c in 0..m.ncols() {
        let sign = if (c & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        m[(c ^ x, c)] += base * sign;
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.qubits {
            let bit = self.qubits - 1 - j;
            let c = match ((self.x >> bit) & 1, (self.z >> bit) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let q = s.chars().count();
        if q == 0 || q > 16 {
            return Err(Error::PauliLabel(s.into()));
        }
        let (mut x, mut z) = (0u32, 0u32);
        for (j, ch) in s.chars().enumerate() {
            let bit = 1u32 << (q - 1 - j);
            match ch {
                'I' => {}
                'X' => x |= bit,
                'Y' => {
                    x |= bit;
                    z |= bit;
                }
                'Z' => z |= bit,
                _ => return Err(Error::PauliLabel(s.into())),
            }
        }
        Ok(Self::from_masks(q, x, z))
    }
}

/// Linear combination of distinct Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    qubits: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliDecomposition {
    pub fn new(qubits: usize, terms: Vec<(Complex64, PauliString)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(terms.len());
        for (_, p) in &terms {
            if p.qubits != qubits {
                return Err(Error::Dimension {
                    expected: qubits,
                    got: p.qubits,
                });
            }
            if !seen.insert(*p) {
                return Err(Error::DuplicateTerm(p.label()));
            }
        }
        Ok(Self { qubits, terms })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    /// Number of terms `L`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Dense `Σ c_l P_l`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = 1usize << self.qubits;
        let mut m = CMatrix::zeros(n, n);
        for &(c, p) in &self.terms {
            add_scaled(&mut m, p, c);
        }
        m
    }

    /// `Σ c_l (P_l v)`, accumulated in term order.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = 1usize << self.qubits;
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        let mut out = vec![ZERO; n];
        for &(c, p) in &self.terms {
            p.accumulate(c, v, &mut out);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut terms: Vec<(f64, f64, String)> = self
            .terms
            .iter()
            // adding 0.0 turns -0.0 into 0.0 so output does not depend on rounding sign
            .map(|(c, p)| (c.re + 0.0, c.im + 0.0, p.label()))
            .collect();
        terms.sort_by(|a, b| a.2.cmp(&b.2));
        Ok(serde_json::to_string(&DecompositionJson {
            qubits: self.qubits,
            terms,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DecompositionJson = serde_json::from_str(text)?;
        let terms = raw
            .terms
            .into_iter()
            .map(|(re, im, label)| Ok((Complex64::new(re, im), label.parse()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.qubits, terms)
    }
}

#[derive(Serialize, Deserialize)]
struct DecompositionJson {
    qubits: usize,
    terms: Vec<(f64, f64, String)>,
}

/// In-place unnormalized Walsh-Hadamard transform:
/// `f[z] ← Σ_c (−1)^{|c∧z|} f[c]`.
fn fwht(f: &mut [Complex64]) {
    let n = f.len();
    let mut h = 1;
    while h < n {
        for block in f.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

/// Coefficients `c_P = Tr(P A) / N` for every Pauli string, dropping those
/// with `|c_P| ≤ tol`.
///
/// `Tr(P A) = i^{|x∧z|} Σ_c (−1)^{|c∧z|} A[c, c⊕x]`, so for each `x` mask
/// one Walsh-Hadamard transform of the shifted diagonal yields all `z`
/// coefficients: `O(N² log N)` overall.
pub fn decompose(a: &CMatrix, tol: f64) -> Result<PauliDecomposition> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.ncols(),
        });
    }
    let q = linalg::log2_exact(n)?;
    let inv_n = 1.0 / n as f64;
    let per_x = |x: usize| -> Vec<(Complex64, PauliString)> {
        let mut f: Vec<Complex64> = (0..n).map(|c| a[(c, c ^ x)]).collect();
        fwht(&mut f);
        f.into_iter()
            .enumerate()
            .filter_map(|(z, s)| {
                let coeff = i_pow((x & z).count_ones()) * s * inv_n;
                (coeff.norm() > tol)
                    .then(|| (coeff, PauliString::from_masks(q, x as u32, z as u32)))
            })
            .collect()
    };
    let terms: Vec<_> = if n >= 256 {
        (0..n).into_par_iter().flat_map_iter(per_x).collect()
    } else {
        (0..n).flat_map(per_x).collect()
    };
    Ok(PauliDecomposition { qubits: q, terms })
}
