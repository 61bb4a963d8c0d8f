//! Dense-matrix oracles built from Kronecker products, independent of the
//! library's index-twiddling kernels.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vqls_core::problem::SystemMeta;
use vqls_core::{LinearSystem, ParamSet};

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    vqls_core::seed::rng(seed)
}

pub fn kron_all(factors: &[M]) -> M {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| acc.kronecker(f))
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

/// Single-qubit `g` on `qubit` of a `q`-qubit register, qubit 0 leftmost.
pub fn embed(g: &M, qubit: usize, q: usize) -> M {
    let factors: Vec<M> = (0..q)
        .map(|j| if j == qubit { g.clone() } else { eye(2) })
        .collect();
    kron_all(&factors)
}

pub fn ry(theta: f64) -> M {
    let (s, co) = (theta / 2.0).sin_cos();
    M::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn pauli(ch: char) -> M {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match ch {
        'I' => eye(2),
        'X' => M::from_row_slice(2, 2, &[o, l, l, o]),
        'Y' => M::from_row_slice(2, 2, &[o, -i, i, o]),
        'Z' => M::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => panic!("bad pauli {ch}"),
    }
}

pub fn pauli_matrix(label: &str) -> M {
    let factors: Vec<M> = label.chars().map(pauli).collect();
    kron_all(&factors)
}

fn proj0() -> M {
    M::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
}

/// `CZ` between qubits `i` and `j` as `I − 2 |11⟩⟨11|` on that pair.
pub fn cz(i: usize, j: usize, q: usize) -> M {
    let one = M::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    let factors: Vec<M> = (0..q)
        .map(|k| if k == i || k == j { one.clone() } else { eye(2) })
        .collect();
    eye(1 << q) - kron_all(&factors) * c(2.0, 0.0)
}

pub fn ring(q: usize) -> M {
    let pairs: Vec<(usize, usize)> = match q {
        1 => vec![],
        2 => vec![(0, 1)],
        _ => (0..q).map(|j| (j, (j + 1) % q)).collect(),
    };
    pairs
        .into_iter()
        .fold(eye(1 << q), |acc, (i, j)| cz(i, j, q) * acc)
}

/// Dense circuit for the Ry / CZ-ring / Ry / CZ-ring / Ry ansatz.
pub fn ansatz_unitary(p: &ParamSet) -> M {
    let q = p.qubits();
    let wall = |slot: usize| {
        let factors: Vec<M> = (0..q).map(|j| ry(p.get(j, slot))).collect();
        kron_all(&factors)
    };
    let r = ring(q);
    wall(2) * &r * wall(1) * &r * wall(0)
}

pub fn ansatz_vector(p: &ParamSet) -> V {
    ansatz_unitary(p).column(0).into_owned()
}

/// Householder `e^{iφ}(I − 2ww†)` mapping `e_0` to `b`.
pub fn householder(b: &[Complex64]) -> M {
    let n = b.len();
    let phi = b[0].arg();
    let ph = Complex64::from_polar(1.0, phi);
    let mut w = V::from_fn(n, |k, _| -b[k] / ph);
    w[0] += c(1.0, 0.0);
    let nw = w.norm();
    if nw < 1e-14 {
        return eye(n) * ph;
    }
    w /= c(nw, 0.0);
    (eye(n) - &w * w.adjoint() * c(2.0, 0.0)) * ph
}

pub fn vec_of(v: &[Complex64]) -> V {
    V::from_column_slice(v)
}

/// Raw and normalized global cost through `A†(I − bb†)A`.
pub fn global_oracle(a: &M, b: &[Complex64], x: &V) -> (f64, f64) {
    let bv = vec_of(b);
    let n = a.nrows();
    let h = a.adjoint() * (eye(n) - &bv * bv.adjoint()) * a;
    let raw = (x.adjoint() * h * x)[0].re;
    let norm = (x.adjoint() * a.adjoint() * a * x)[0].re;
    (raw, raw / norm)
}

/// Raw and normalized local cost through `A† U (I − (1/q) Σ_j |0_j⟩⟨0_j|) U† A`.
pub fn local_oracle(a: &M, b: &[Complex64], x: &V) -> (f64, f64) {
    let n = a.nrows();
    let q = n.trailing_zeros() as usize;
    let u = householder(b);
    let mut proj_sum = M::zeros(n, n);
    for j in 0..q {
        proj_sum += embed(&proj0(), j, q);
    }
    let inner = eye(n) - proj_sum * c(1.0 / q as f64, 0.0);
    let h = a.adjoint() * &u * inner * u.adjoint() * a;
    let raw = (x.adjoint() * h * x)[0].re;
    let norm = (x.adjoint() * a.adjoint() * a * x)[0].re;
    (raw, raw / norm)
}

pub fn meta(n: usize) -> SystemMeta {
    SystemMeta {
        source: "test".into(),
        original_dim: n,
        seed: None,
        rhs_scale: 1.0,
        matrix_scale: 1.0,
    }
}

/// Dense random system with a unit random `b`.
pub fn random_system(r: &mut impl Rng, q: usize, id: &str) -> LinearSystem {
    let n = 1 << q;
    let a = vqls_core::simulator::random_matrix(r, n);
    let b = vqls_core::simulator::random_state(r, q).into_amplitudes();
    LinearSystem::new(id, a, b, meta(n)).unwrap()
}

pub fn random_params(r: &mut impl Rng, q: usize) -> ParamSet {
    let rows = (0..q)
        .map(|_| {
            [
                r.gen_range(0.0..std::f64::consts::TAU),
                r.gen_range(0.0..std::f64::consts::TAU),
                r.gen_range(0.0..std::f64::consts::TAU),
            ]
        })
        .collect();
    ParamSet::new(rows).unwrap()
}

pub fn identity_system(q: usize) -> LinearSystem {
    let n = 1 << q;
    let mut b = vec![c(0.0, 0.0); n];
    b[0] = c(1.0, 0.0);
    LinearSystem::new("eye", eye(n), b, meta(n)).unwrap()
}
