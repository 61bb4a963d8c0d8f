//! Library results checked against independent dense or closed-form oracles.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use common::*;
use rand::Rng;
use vqls_core::cost::{self, Matvec, Objective};
use vqls_core::graphenc::{self, RecordMeta};
use vqls_core::init::{self, ANGLE_SPAN};
use vqls_core::pauli::{self, PauliDecomposition, PauliString};
use vqls_core::problem::{self, RhsPolicy};
use vqls_core::simulator::{ansatz_state, BPrepOperator};
use vqls_core::{CostKind, DatasetRecord, LinearSystem, ParamSet, StateVector};

fn frob(m: &M) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn max_diff(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn sparse_generator_nonzero_count() {
    let sys = problem::gen_random_system(4, 0.01, 7).unwrap();
    let a = sys.matrix();
    let mut diag = 0;
    let mut off = 0;
    for i in 0..16 {
        for j in 0..16 {
            if a[(i, j)].norm() != 0.0 {
                if i == j {
                    diag += 1;
                } else {
                    off += 1;
                }
            }
        }
    }
    assert_eq!((diag, off), (16, 3));
}

#[test]
fn five_by_five_file_pads_with_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("five.mtx");
    let mut text = String::from("%%MatrixMarket matrix coordinate real general\n5 5 7\n");
    for i in 1..=5 {
        text.push_str(&format!("{i} {i} {}\n", i as f64 + 0.5));
    }
    text.push_str("1 5 -2\n4 2 3\n");
    std::fs::write(&path, text).unwrap();
    let sys = problem::load_matrix_market(&path, &RhsPolicy::Ones).unwrap();
    assert_eq!((sys.qubits(), sys.meta().original_dim), (3, 5));
    let a = sys.matrix();
    for r in 5..8 {
        for col in 0..8 {
            let expect = if r == col { 1.0 } else { 0.0 };
            assert_eq!(a[(r, col)], c(expect, 0.0));
        }
    }
    assert_eq!(a[(0, 4)], c(-2.0, 0.0));
    assert_eq!(a[(3, 1)], c(3.0, 0.0));
}

#[test]
fn normalization_preserves_costs_against_dense_oracle() {
    let mut r = rng(11);
    let q = 3;
    let n = 8;
    let a = vqls_core::simulator::random_matrix(&mut r, n) * c(7.5, 0.0);
    let b: Vec<_> = (0..n).map(|_| c(r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0))).collect();
    let raw = LinearSystem::new("raw", a.clone(), b.clone(), meta(n)).unwrap();
    let norm_sys = problem::normalize_system(&raw).unwrap();
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let unit: Vec<_> = b.iter().map(|z| z / nb).collect();
    for _ in 0..5 {
        let p = random_params(&mut r, q);
        let x = ansatz_vector(&p);
        let before = global_oracle(&a, &unit, &x).1;
        let after = global_oracle(norm_sys.matrix(), norm_sys.rhs(), &x).1;
        assert!((before - after).abs() < 1e-12);
        let lib = Objective::new(&norm_sys, CostKind::Global).unwrap().evaluate(&p).unwrap();
        assert!((lib.normalized - before).abs() < 1e-12);
    }
    assert!((frob(norm_sys.matrix()) - n as f64).abs() < 1e-9);
}

#[test]
fn decomposition_matches_trace_formula() {
    let labels = ["I", "X", "Y", "Z"];
    let a = M::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
    let d = pauli::decompose(&a, 0.0).unwrap();
    for l in labels {
        let oracle = (pauli_matrix(l) * &a).trace() / c(2.0, 0.0);
        let got = d
            .terms()
            .iter()
            .find(|(_, p)| p.label() == l)
            .map(|t| t.0)
            .unwrap_or(c(0.0, 0.0));
        assert!((got - oracle).norm() < 1e-14, "{l}");
    }
    assert!((oracle_y(&d) - c(0.0, -0.5)).norm() < 1e-14);

    // every two-qubit label on a random matrix
    let mut r = rng(3);
    let a = vqls_core::simulator::random_matrix(&mut r, 4);
    let d = pauli::decompose(&a, 0.0).unwrap();
    assert_eq!(d.len(), 16);
    for l1 in labels {
        for l2 in labels {
            let label = format!("{l1}{l2}");
            let oracle = (pauli_matrix(&label) * &a).trace() / c(4.0, 0.0);
            let got = d.terms().iter().find(|(_, p)| p.label() == label).unwrap().0;
            assert!((got - oracle).norm() < 1e-13, "{label}");
        }
    }
}

fn oracle_y(d: &PauliDecomposition) -> num_complex::Complex64 {
    d.terms().iter().find(|(_, p)| p.label() == "Y").unwrap().0
}

#[test]
fn reconstruct_roundtrip_eight_by_eight() {
    let mut r = rng(5);
    let a = vqls_core::simulator::random_matrix(&mut r, 8);
    let d = pauli::decompose(&a, 0.0).unwrap();
    assert!(frob(&(d.reconstruct() - &a)) < 1e-12);
}

#[test]
fn term_application_matches_kronecker() {
    let zx: PauliString = "ZX".parse().unwrap();
    let mut e0 = vec![c(0.0, 0.0); 4];
    e0[0] = c(1.0, 0.0);
    let dense = pauli_matrix("ZX") * vec_of(&e0);
    assert!(max_diff(&zx.apply(&e0).unwrap(), dense.as_slice()) < 1e-15);

    let mut r = rng(8);
    for label in ["XYZI", "YYYY", "IZXY", "ZIIX"] {
        let p: PauliString = label.parse().unwrap();
        let v = vqls_core::simulator::random_state(&mut r, 4).into_amplitudes();
        let dense = pauli_matrix(label) * vec_of(&v);
        assert!(max_diff(&p.apply(&v).unwrap(), dense.as_slice()) < 1e-14, "{label}");
    }
}

#[test]
fn decomposition_apply_matches_dense_matvec() {
    let mut r = rng(9);
    let a = vqls_core::simulator::random_matrix(&mut r, 16);
    let v = vqls_core::simulator::random_state(&mut r, 4).into_amplitudes();
    let d = pauli::decompose(&a, 0.0).unwrap();
    let dense = &a * vec_of(&v);
    let scale = dense.norm();
    assert!(max_diff(&d.apply(&v).unwrap(), dense.as_slice()) / scale < 1e-12);
}

#[test]
fn ansatz_matches_dense_circuit() {
    let mut r = rng(21);
    for q in 1..=4 {
        for _ in 0..5 {
            let p = random_params(&mut r, q);
            let lib = ansatz_state(&p);
            let oracle = ansatz_vector(&p);
            assert!(max_diff(lib.amplitudes(), oracle.as_slice()) < 1e-12, "q={q}");
        }
    }
}

#[test]
fn householder_matches_dense_reflection() {
    let s = FRAC_1_SQRT_2;
    let b = vec![c(s, 0.0), c(s, 0.0)];
    let u = BPrepOperator::build(&b).unwrap();
    let image = u.apply(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(max_diff(&image, &b) < 1e-12);
    let dense = householder(&b);
    assert!(frob(&(dense.adjoint() * &dense - eye(2))) < 1e-12);

    let mut r = rng(31);
    for q in 1..=4 {
        let b = vqls_core::simulator::random_state(&mut r, q).into_amplitudes();
        let v = vqls_core::simulator::random_state(&mut r, q).into_amplitudes();
        let u = BPrepOperator::build(&b).unwrap();
        let dense = householder(&b);
        assert!(frob(&(dense.adjoint() * &dense - eye(1 << q))) < 1e-12);
        let want = dense.adjoint() * vec_of(&v);
        assert!(max_diff(&u.apply_adjoint(&v).unwrap(), want.as_slice()) < 1e-12);
        let want = &dense * vec_of(&v);
        assert!(max_diff(&u.apply(&v).unwrap(), want.as_slice()) < 1e-12);
    }
}

#[test]
fn costs_match_dense_operators() {
    let mut r = rng(41);
    for q in 1..=3 {
        for k in 0..10 {
            let sys = random_system(&mut r, q, &format!("r{k}"));
            let p = random_params(&mut r, q);
            let x = ansatz_vector(&p);
            let state = ansatz_state(&p);
            let (g_raw, g) = global_oracle(sys.matrix(), sys.rhs(), &x);
            let (l_raw, l) = local_oracle(sys.matrix(), sys.rhs(), &x);
            let u = BPrepOperator::build(sys.rhs()).unwrap();
            let gl = cost::global_cost(&sys, &state).unwrap();
            let ll = cost::local_cost(&sys, &state, &u).unwrap();
            assert!((gl.normalized - g).abs() < 1e-12 && (ll.normalized - l).abs() < 1e-12);
            assert!((gl.raw - g_raw).abs() < 1e-12 * g_raw.abs().max(1.0));
            assert!((ll.raw - l_raw).abs() < 1e-12 * l_raw.abs().max(1.0));
            if q == 1 {
                assert!((g - l).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn pauli_matvec_path_agrees_with_dense() {
    let mut r = rng(43);
    let sys = random_system(&mut r, 3, "p");
    let d = pauli::decompose(sys.matrix(), 0.0).unwrap();
    for kind in [CostKind::Global, CostKind::Local] {
        let dense = Objective::new(&sys, kind).unwrap();
        let via = Objective::new(&sys, kind).unwrap().with_matvec(Matvec::Pauli(&d));
        let p = random_params(&mut r, 3);
        let (a, b) = (dense.evaluate(&p).unwrap(), via.evaluate(&p).unwrap());
        assert!((a.normalized - b.normalized).abs() < 1e-12);
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut r = rng(51);
    for k in 0..5 {
        let sys = random_system(&mut r, 2, &format!("g{k}"));
        let p = random_params(&mut r, 2);
        for kind in [CostKind::Global, CostKind::Local] {
            let obj = Objective::new(&sys, kind).unwrap();
            let g = obj.gradient(&p).unwrap();
            let fd = obj.finite_diff_gradient(&p, 1e-5).unwrap();
            for (a, b) in g.iter().flatten().zip(fd.iter().flatten()) {
                let err = (a - b).abs();
                assert!(err < 1e-8 || err / a.abs() < 1e-5, "{a} vs {b}");
            }
        }
    }
}

/// Asymptotic Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as i64 % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[test]
fn uniform_draws_are_uniform() {
    let draws: Vec<ParamSet> = (0..10_000).map(|s| init::init_uniform(4, s)).collect();
    for slot in 0..3 {
        let mut xs: Vec<f64> = draws
            .iter()
            .flat_map(|p| (0..4).map(move |j| p.get(j, slot)))
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - PI).abs() < 0.1, "slot {slot} mean {mean}");
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = x / TAU;
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks_pvalue(d, n) > 1e-3, "slot {slot} D={d}");
    }
}

#[test]
fn pca_of_diagonal_matches_closed_form_svd() {
    let mut a = eye(4);
    a[(0, 0)] = c(5.0, 0.0);
    let mut b = vec![c(0.0, 0.0); 4];
    b[0] = c(1.0, 0.0);
    let sys = LinearSystem::new("d", a, b, meta(4)).unwrap();
    // leading right singular vector is e_0; cycled to length 6 it is (1,0,0,0,1,0)
    let want = [ANGLE_SPAN, 0.0, 0.0, 0.0, ANGLE_SPAN, 0.0];
    assert_eq!(init::init_pca(&sys).unwrap().flatten(), want);
}

#[test]
fn rowmean_follows_block_average_map() {
    // q=3: eight rows scaled 1..8, nine blocks so means are cycled
    let n = 8;
    let a = M::from_fn(n, n, |i, _| c((i + 1) as f64, 0.0));
    let sys = LinearSystem::new("rows", a, vec![c(1.0 / (n as f64).sqrt(), 0.0); n], meta(n))
        .unwrap();
    let got = init::init_rowmean(&sys).flatten();
    let means: Vec<f64> = (0..9).map(|k| ((k % n) + 1) as f64).collect();
    let want: Vec<f64> = means.iter().map(|m| (m - 1.0) / 7.0 * ANGLE_SPAN).collect();
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12);
    }

    // q=4: sixteen rows in twelve blocks are strictly increasing
    let n = 16;
    let a = M::from_fn(n, n, |i, _| c((i + 1) as f64, 0.0));
    let sys = LinearSystem::new("rows", a, vec![c(0.25, 0.0); n], meta(n)).unwrap();
    let got = init::init_rowmean(&sys).flatten();
    assert_eq!(got[0], 0.0);
    assert_eq!(got[11], ANGLE_SPAN);
    assert!(got.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn minnorm_fits_product_targets() {
    let b = vec![c(0.5, 0.0); 4];
    let sys = LinearSystem::new("plus", eye(4), b.clone(), meta(4)).unwrap();
    let p = init::init_minnorm(&sys).unwrap();
    for j in 0..2 {
        assert!((p.get(j, 0) - PI / 2.0).abs() < 1e-12);
    }
    let (_, cg) = global_oracle(&eye(4), &b, &ansatz_vector(&p));
    assert!(cg < 0.05, "{cg}");

    for q in 1..=3 {
        for k in 0..1usize << q {
            let mut b = vec![c(0.0, 0.0); 1 << q];
            b[k] = c(1.0, 0.0);
            let sys = LinearSystem::new("e", eye(1 << q), b, meta(1 << q)).unwrap();
            let x = ansatz_state(&init::init_minnorm(&sys).unwrap());
            assert!(x.amplitudes()[k].norm_sqr() > 0.999, "q={q} k={k}");
        }
    }
}

#[test]
fn sparse_graph_roundtrip() {
    for seed in 0..5 {
        let sys = problem::gen_random_system(4, 0.05, seed).unwrap();
        let g = graphenc::encode(&sys);
        assert_eq!(g.edges.len(), sys.nnz());
        assert_eq!(g.positive_edges() + g.negative_edges(), g.edges.len());
        let (a, b) = graphenc::decode_structure(&g, sys.dim()).unwrap();
        assert_eq!(&a, sys.matrix());
        assert_eq!(b.as_slice(), sys.rhs());
    }
}

#[test]
fn dataset_roundtrip_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let records: Vec<DatasetRecord> = (0..100)
        .map(|s| {
            let sys = problem::gen_random_system(2 + (s as usize % 3), 0.1, s).unwrap();
            let label = (s % 2 == 0).then(|| init::init_uniform(sys.qubits(), s));
            DatasetRecord::new(&sys, label, RecordMeta::default())
        })
        .collect();
    let first = dir.path().join("a.jsonl");
    let second = dir.path().join("b.jsonl");
    graphenc::export_dataset(&records, &first).unwrap();
    let back = graphenc::import_dataset(&first).unwrap();
    assert_eq!(back, records);
    graphenc::export_dataset(&back, &second).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn solution_params_have_unit_fidelity() {
    // x̂ is a basis state, reachable exactly by a Ry(π) wall
    let mut a = eye(4);
    a[(3, 3)] = c(2.0, 0.0);
    let mut b = vec![c(0.0, 0.0); 4];
    b[3] = c(1.0, 0.0);
    let sys = LinearSystem::new("f", a, b, meta(4)).unwrap();
    let p = ParamSet::new(vec![[PI, 0.0, 0.0], [PI, 0.0, 0.0]]).unwrap();
    let f = vqls_core::driver::solution_fidelity(&sys, &p).unwrap();
    assert!((f - 1.0).abs() < 1e-9);
    let x = StateVector::from_amplitudes(ansatz_vector(&p).as_slice().to_vec()).unwrap();
    assert!(x.amplitudes()[3].norm_sqr() > 1.0 - 1e-12);
}
