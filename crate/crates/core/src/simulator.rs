//! Exact statevector simulation of the ansatz `V(α)` and of the
//! b-preparation unitary `U_b`.
//!
//! Qubit `j` of a `q`-qubit register is bit `q − 1 − j` of an amplitude index,
//! so qubit 0 is the most significant (leftmost) tensor factor.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

const NORM_TOL: f64 = 1e-10;

/// Unit-norm register of `2^q` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(qubits: usize) -> Self {
        assert!(qubits >= 1, "register needs at least one qubit");
        let mut amps = vec![ZERO; 1 << qubits];
        amps[0] = ONE;
        Self { qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let qubits = linalg::log2_exact(amps.len())?;
        if qubits == 0 {
            return Err(Error::NotPowerOfTwo(1));
        }
        let n = linalg::norm(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnit(n));
        }
        Ok(Self { qubits, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        linalg::inner(&self.amps, &other.amps).norm_sqr()
    }

    /// Debug form: JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&crate::problem::vector_to_pairs(&self.amps))
            .expect("finite amplitudes serialize")
    }

    fn stride(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                qubits: self.qubits,
            });
        }
        Ok(1 << (self.qubits - 1 - qubit))
    }

    /// `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]` on `qubit`.
    pub fn apply_ry(&mut self, qubit: usize, theta: f64) -> Result<()> {
        let stride = self.stride(qubit)?;
        let (s, c) = (theta / 2.0).sin_cos();
        for k in 0..self.amps.len() {
            if k & stride == 0 {
                let (a0, a1) = (self.amps[k], self.amps[k | stride]);
                self.amps[k] = a0 * c - a1 * s;
                self.amps[k | stride] = a0 * s + a1 * c;
            }
        }
        Ok(())
    }

    /// `Rz(θ) = diag(e^{−iθ/2}, e^{iθ/2})` on `qubit`.
    pub fn apply_rz(&mut self, qubit: usize, theta: f64) -> Result<()> {
        let stride = self.stride(qubit)?;
        let lo = Complex64::from_polar(1.0, -theta / 2.0);
        let hi = lo.conj();
        for (k, a) in self.amps.iter_mut().enumerate() {
            *a *= if k & stride == 0 { lo } else { hi };
        }
        Ok(())
    }

    /// Controlled-Z: negate amplitudes where both qubits are 1.
    pub fn apply_cz(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::SameQubit(i));
        }
        let mask = self.stride(i)? | self.stride(j)?;
        for (k, a) in self.amps.iter_mut().enumerate() {
            if k & mask == mask {
                *a = -*a;
            }
        }
        Ok(())
    }

    /// CZ on neighbouring pairs `(0,1), (1,2), …, (q−1,0)`; a single CZ for
    /// two qubits, nothing for one.
    pub fn apply_cz_ring(&mut self) {
        for (i, j) in cz_ring_pairs(self.qubits) {
            self.apply_cz(i, j).expect("ring pairs are in range");
        }
    }
}

pub fn cz_ring_pairs(qubits: usize) -> Vec<(usize, usize)> {
    match qubits {
        0 | 1 => vec![],
        2 => vec![(0, 1)],
        q => (0..q).map(|j| (j, (j + 1) % q)).collect(),
    }
}

/// Rotation angles, one row of three slots per qubit, radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct ParamSet {
    rows: Vec<[f64; 3]>,
}

impl ParamSet {
    pub fn new(rows: Vec<[f64; 3]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Shape {
                expected_rows: 1,
                detail: "0 rows".into(),
            });
        }
        if let Some(v) = rows.iter().flatten().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(Self { rows })
    }

    pub fn zeros(qubits: usize) -> Self {
        Self {
            rows: vec![[0.0; 3]; qubits.max(1)],
        }
    }

    /// From `3q` values in row-major order.
    pub fn from_flat(qubits: usize, values: &[f64]) -> Result<Self> {
        if values.len() != 3 * qubits {
            return Err(Error::Shape {
                expected_rows: qubits,
                detail: format!("{} flat values", values.len()),
            });
        }
        Self::new(
            values
                .chunks_exact(3)
                .map(|c| [c[0], c[1], c[2]])
                .collect(),
        )
    }

    pub fn qubits(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[f64; 3]] {
        &self.rows
    }

    pub fn get(&self, qubit: usize, slot: usize) -> f64 {
        self.rows[qubit][slot]
    }

    pub fn set(&mut self, qubit: usize, slot: usize, value: f64) {
        self.rows[qubit][slot] = value;
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Every angle reduced into `[0, 2π)`.
    pub fn wrapped(&self) -> Self {
        Self {
            rows: self.rows.iter().map(|r| r.map(wrap_angle)).collect(),
        }
    }
}

impl TryFrom<Vec<[f64; 3]>> for ParamSet {
    type Error = Error;

    fn try_from(rows: Vec<[f64; 3]>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<ParamSet> for Vec<[f64; 3]> {
    fn from(p: ParamSet) -> Self {
        p.rows
    }
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `V(α)|0…0⟩`.
///
/// Layer order: Ry wall (slot 0), CZ ring, Ry wall (slot 1), CZ ring,
/// Ry wall (slot 2). At zero angles the two rings cancel, so the circuit is
/// the identity and computational basis states prepared by the first wall
/// pass through unchanged up to sign.
pub fn ansatz_state(params: &ParamSet) -> StateVector {
    let q = params.qubits();
    let mut state = StateVector::zero(q);
    for slot in 0..3 {
        if slot > 0 {
            state.apply_cz_ring();
        }
        for qubit in 0..q {
            state
                .apply_ry(qubit, params.get(qubit, slot))
                .expect("qubit in range");
        }
    }
    state
}

/// Householder form of a unitary `U_b` with `U_b|0…0⟩ = |b⟩`:
/// `U_b = e^{iφ}(I − 2 w w†)`, or `e^{iφ} I` when `|b⟩ ∝ |0…0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BPrepOperator {
    qubits: usize,
    phase: Complex64,
    reflector: Option<Vec<Complex64>>,
}

impl BPrepOperator {
    pub fn build(b: &[Complex64]) -> Result<Self> {
        let qubits = linalg::log2_exact(b.len())?;
        if qubits == 0 {
            return Err(Error::NotPowerOfTwo(1));
        }
        let nb = linalg::norm(b);
        if (nb - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnit(nb));
        }
        let phi = if b[0].norm() > 0.0 { b[0].arg() } else { 0.0 };
        let phase = Complex64::from_polar(1.0, phi);
        // b' = e^{-iφ} b has a real nonnegative first entry
        let mut d: Vec<Complex64> = b.iter().map(|z| -(z * phase.conj())).collect();
        d[0] += ONE;
        let dn = linalg::norm(&d);
        let reflector = if dn < 1e-14 {
            None
        } else {
            d.iter_mut().for_each(|z| *z /= dn);
            Some(d)
        };
        let op = Self {
            qubits,
            phase,
            reflector,
        };
        let mut e0 = vec![ZERO; b.len()];
        e0[0] = ONE;
        let image = op.apply(&e0)?;
        let err = image
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if err > NORM_TOL {
            return Err(Error::NotUnit(nb));
        }
        Ok(op)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn is_identity(&self) -> bool {
        self.reflector.is_none()
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    fn check(&self, v: &[Complex64]) -> Result<()> {
        let n = 1usize << self.qubits;
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        Ok(())
    }

    fn reflect_scaled(&self, v: &[Complex64], phase: Complex64) -> Vec<Complex64> {
        match &self.reflector {
            None => v.iter().map(|z| z * phase).collect(),
            Some(w) => {
                let proj = linalg::inner(w, v) * 2.0;
                v.iter()
                    .zip(w)
                    .map(|(vi, wi)| (vi - wi * proj) * phase)
                    .collect()
            }
        }
    }

    /// `U_b v`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(v)?;
        Ok(self.reflect_scaled(v, self.phase))
    }

    /// `U_b† v`; the reflection is self-inverse, so only the phase flips.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(v)?;
        Ok(self.reflect_scaled(v, self.phase.conj()))
    }
}

/// Random unit state with amplitudes drawn uniformly from the unit square.
pub fn random_state(rng: &mut impl Rng, qubits: usize) -> StateVector {
    let mut v: Vec<Complex64> = (0..1usize << qubits)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    linalg::normalize(&mut v);
    StateVector { qubits, amps: v }
}

/// Dense complex matrix with entries uniform in the unit square.
pub fn random_matrix(rng: &mut impl Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}
