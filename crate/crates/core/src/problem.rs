//! Linear-system instances: generation, ingestion, normalization and splits.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::mtx::{self, CooMatrix};
use crate::{seed, MAX_QUBITS};

/// Provenance and scaling record of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMeta {
    /// `synthetic` or `suitesparse:<name>`.
    pub source: String,
    /// Dimension before padding to a power of two.
    pub original_dim: usize,
    pub seed: Option<u64>,
    /// Cumulative factor applied to the right-hand side.
    pub rhs_scale: f64,
    /// Cumulative factor applied to the matrix.
    pub matrix_scale: f64,
}

/// `A x = b` with `dim A = 2^qubits`.
///
/// Immutable after construction. Every row of `A` has a nonzero entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    id: String,
    qubits: usize,
    matrix: CMatrix,
    rhs: Vec<Complex64>,
    meta: SystemMeta,
}

impl LinearSystem {
    pub fn new(
        id: impl Into<String>,
        matrix: CMatrix,
        rhs: Vec<Complex64>,
        meta: SystemMeta,
    ) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: matrix.ncols(),
            });
        }
        let qubits = linalg::log2_exact(dim)?;
        if qubits == 0 {
            return Err(Error::QubitRange(0, 1, MAX_QUBITS));
        }
        if rhs.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: rhs.len(),
            });
        }
        if matrix.iter().all(|z| *z == ZERO) {
            return Err(Error::ZeroMatrix);
        }
        if let Some(row) = (0..dim).find(|&i| matrix.row(i).iter().all(|z| *z == ZERO)) {
            return Err(Error::ZeroRow(row));
        }
        Ok(Self {
            id: id.into(),
            qubits,
            matrix,
            rhs,
            meta,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[Complex64] {
        &self.rhs
    }

    pub fn meta(&self) -> &SystemMeta {
        &self.meta
    }

    /// Same system with `A` replaced by `factor · A`.
    pub fn scaled_matrix(&self, factor: Complex64) -> Result<Self> {
        Self::new(
            self.id.clone(),
            self.matrix.map(|z| z * factor),
            self.rhs.clone(),
            self.meta.clone(),
        )
    }

    /// Same system with `b` replaced by `factor · b`.
    pub fn scaled_rhs(&self, factor: Complex64) -> Result<Self> {
        Self::new(
            self.id.clone(),
            self.matrix.clone(),
            self.rhs.iter().map(|z| z * factor).collect(),
            self.meta.clone(),
        )
    }

    /// Coordinate view of the nonzero entries, row-major.
    pub fn to_coo(&self) -> CooMatrix {
        let n = self.dim();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        CooMatrix {
            nrows: n,
            ncols: n,
            entries,
        }
    }

    pub fn nnz(&self) -> usize {
        self.matrix.iter().filter(|z| **z != ZERO).count()
    }
}

/// Random sparse instance with a full positive diagonal.
///
/// Diagonal entries are uniform in `[1, 2)`; `ceil(density · N²)` distinct
/// off-diagonal positions (capped at `N² − N`) get values uniform in
/// `[−1, 1) \ {0}`. The right-hand side is uniform in `[−1, 1)` and then
/// normalized to unit length.
pub fn gen_random_system(qubits: usize, density: f64, seed: u64) -> Result<LinearSystem> {
    if !(2..=MAX_QUBITS).contains(&qubits) {
        return Err(Error::QubitRange(qubits, 2, MAX_QUBITS));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Density(density));
    }
    let n = 1usize << qubits;
    let mut rng = seed::rng(seed);
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = Complex64::new(rng.gen_range(1.0..2.0), 0.0);
    }
    let slots = n * n - n;
    let k = ((density * (n * n) as f64).ceil() as usize).min(slots);
    let mut picks = rand::seq::index::sample(&mut rng, slots, k).into_vec();
    picks.sort_unstable();
    for p in picks {
        // off-diagonal slot p: row p / (n-1), skipping the diagonal column
        let i = p / (n - 1);
        let mut j = p % (n - 1);
        if j >= i {
            j += 1;
        }
        a[(i, j)] = Complex64::new(nonzero_uniform(&mut rng), 0.0);
    }
    let mut b: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();
    let norm = linalg::normalize(&mut b);
    if norm == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let meta = SystemMeta {
        source: "synthetic".into(),
        original_dim: n,
        seed: Some(seed),
        rhs_scale: 1.0 / norm,
        matrix_scale: 1.0,
    };
    LinearSystem::new(format!("q{qubits}-s{seed}"), a, b, meta)
}

fn nonzero_uniform(rng: &mut impl Rng) -> f64 {
    loop {
        let v: f64 = rng.gen_range(-1.0..1.0);
        if v != 0.0 {
            return v;
        }
    }
}

/// How the right-hand side of an ingested matrix is built.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsPolicy {
    Ones,
    Random(u64),
    /// JSON array of `[re, im]` pairs, original or padded length.
    File(PathBuf),
}

/// Read a Matrix Market file and embed it into the smallest `2^q` dimension.
///
/// Extra diagonal entries are 1 and extra right-hand-side entries are 0, so the
/// solution of the padded system restricted to the original block solves the
/// original system.
pub fn load_matrix_market(path: &Path, rhs_policy: &RhsPolicy) -> Result<LinearSystem> {
    let coo = mtx::read(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "matrix".into());
    if coo.nrows != coo.ncols {
        return Err(Error::Dimension {
            expected: coo.nrows,
            got: coo.ncols,
        });
    }
    let original = coo.nrows;
    let padded = original.max(2).next_power_of_two();
    if padded > 1 << MAX_QUBITS {
        return Err(Error::TooLarge(padded));
    }
    let mut a = CMatrix::zeros(padded, padded);
    for &(i, j, v) in &coo.entries {
        a[(i, j)] += v;
    }
    if let Some(row) = (0..original).find(|&i| a.row(i).iter().all(|z| *z == ZERO)) {
        return Err(Error::ZeroRow(row));
    }
    for i in original..padded {
        a[(i, i)] = ONE;
    }

    let mut b = vec![ZERO; padded];
    let seed = match rhs_policy {
        RhsPolicy::Ones => {
            b[..original].fill(ONE);
            None
        }
        RhsPolicy::Random(s) => {
            let mut rng = seed::rng(*s);
            for z in &mut b[..original] {
                *z = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            }
            Some(*s)
        }
        RhsPolicy::File(p) => {
            let v = read_vector(p)?;
            if v.len() != original && v.len() != padded {
                return Err(Error::Dimension {
                    expected: original,
                    got: v.len(),
                });
            }
            b[..original].copy_from_slice(&v[..original]);
            None
        }
    };
    let norm = linalg::normalize(&mut b);
    if norm == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let meta = SystemMeta {
        source: format!("suitesparse:{name}"),
        original_dim: original,
        seed,
        rhs_scale: 1.0 / norm,
        matrix_scale: 1.0,
    };
    LinearSystem::new(name, a, b, meta)
}

/// Unit-normalize `b` and rescale `A` by `N / ‖A‖_F` so entries stay `O(1)`.
///
/// Normalized costs are invariant under the matrix rescaling.
pub fn normalize_system(sys: &LinearSystem) -> Result<LinearSystem> {
    let mut b = sys.rhs.clone();
    let bn = linalg::normalize(&mut b);
    if bn == 0.0 {
        return Err(Error::ZeroRhs);
    }
    let fro = linalg::frobenius(&sys.matrix);
    let factor = sys.dim() as f64 / fro;
    let mut meta = sys.meta.clone();
    meta.rhs_scale *= 1.0 / bn;
    meta.matrix_scale *= factor;
    LinearSystem::new(
        sys.id.clone(),
        sys.matrix.map(|z| z * factor),
        b,
        meta,
    )
}

/// Disjoint train/validation/test partition of instance ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl DatasetSplit {
    pub fn split_of(&self, id: &str) -> Option<&'static str> {
        let has = |v: &[String]| v.iter().any(|x| x == id);
        if has(&self.train) {
            Some("train")
        } else if has(&self.val) {
            Some("val")
        } else if has(&self.test) {
            Some("test")
        } else {
            None
        }
    }
}

/// Deterministic shuffled 8:1:1 split: `floor(0.8 n)` train, the remainder
/// divided between validation (rounded up) and test.
pub fn split_dataset(ids: &[String], seed: u64) -> Result<DatasetSplit> {
    if ids.len() < 10 {
        return Err(Error::TooFewIds(ids.len()));
    }
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut seed::rng(seed));
    let n = ids.len();
    let train = n * 8 / 10;
    let rest = n - train;
    let val = rest.div_ceil(2);
    let test = shuffled.split_off(train + val);
    let val = shuffled.split_off(train);
    Ok(DatasetSplit {
        train: shuffled,
        val,
        test,
    })
}

pub fn read_vector(path: &Path) -> Result<Vec<Complex64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

pub fn vector_to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Serialize, Deserialize)]
struct InstanceMeta {
    id: String,
    qubits: usize,
    #[serde(flatten)]
    meta: SystemMeta,
}

/// Write `matrix.mtx`, `rhs.json` and `meta.json` into `dir`.
pub fn save_instance(sys: &LinearSystem, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    mtx::write(&dir.join("matrix.mtx"), &sys.to_coo())?;
    let rhs = serde_json::to_string(&vector_to_pairs(&sys.rhs))?;
    let rhs_path = dir.join("rhs.json");
    fs::write(&rhs_path, rhs).map_err(|e| Error::io(&rhs_path, e))?;
    let meta = InstanceMeta {
        id: sys.id.clone(),
        qubits: sys.qubits,
        meta: sys.meta.clone(),
    };
    let meta_path = dir.join("meta.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)
        .map_err(|e| Error::io(&meta_path, e))
}

/// Inverse of [`save_instance`]; the stored matrix is already padded.
pub fn load_instance(dir: &Path) -> Result<LinearSystem> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: InstanceMeta = serde_json::from_str(&text)?;
    let coo = mtx::read(&dir.join("matrix.mtx"))?;
    let mut a = CMatrix::zeros(coo.nrows, coo.ncols);
    for (i, j, v) in coo.entries {
        a[(i, j)] += v;
    }
    let b = read_vector(&dir.join("rhs.json"))?;
    let sys = LinearSystem::new(meta.id, a, b, meta.meta)?;
    if sys.qubits != meta.qubits {
        return Err(Error::Dimension {
            expected: 1 << meta.qubits,
            got: sys.dim(),
        });
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn full_density_fills_every_position() {
        let sys = gen_random_system(2, 1.0, 0).unwrap();
        assert_eq!(sys.nnz(), 16);
        for i in 0..4 {
            let d = sys.matrix()[(i, i)];
            assert!(d.re >= 1.0 && d.re < 2.0 && d.im == 0.0);
        }
    }

    #[test]
    fn sparse_generator_counts_nonzeros() {
        let sys = gen_random_system(4, 0.01, 7).unwrap();
        let diag = (0..16).filter(|&i| sys.matrix()[(i, i)] != ZERO).count();
        assert_eq!(diag, 16);
        assert_eq!(sys.nnz() - diag, 3);
        assert!((linalg::norm(sys.rhs()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn generator_is_deterministic() {
        let a = gen_random_system(5, 0.05, 11).unwrap();
        let b = gen_random_system(5, 0.05, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random_system(5, 0.05, 12).unwrap());
    }

    #[test]
    fn generator_rejects_bad_inputs() {
        assert!(matches!(gen_random_system(1, 0.1, 0), Err(Error::QubitRange(..))));
        assert!(matches!(gen_random_system(13, 0.1, 0), Err(Error::QubitRange(..))));
        assert!(matches!(gen_random_system(3, 0.0, 0), Err(Error::Density(_))));
        assert!(matches!(gen_random_system(3, -1.0, 0), Err(Error::Density(_))));
        assert!(matches!(gen_random_system(3, f64::NAN, 0), Err(Error::Density(_))));
    }

    #[test]
    fn identity_is_padded_and_rhs_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            dir.path(),
            "eye3.mtx",
            "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n",
        );
        let sys = load_matrix_market(&p, &RhsPolicy::Ones).unwrap();
        assert_eq!(sys.qubits(), 2);
        assert_eq!(sys.matrix(), &CMatrix::identity(4, 4));
        let s = 1.0 / 3f64.sqrt();
        let want = [s, s, s, 0.0];
        for (z, w) in sys.rhs().iter().zip(want) {
            assert!((z.re - w).abs() < 1e-15 && z.im == 0.0);
        }
        assert_eq!(sys.meta().original_dim, 3);
        assert_eq!(sys.meta().source, "suitesparse:eye3");
    }

    #[test]
    fn five_by_five_pads_to_eight() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("%%MatrixMarket matrix coordinate real general\n5 5 6\n");
        for i in 1..=5 {
            text.push_str(&format!("{i} {i} 2.5\n"));
        }
        text.push_str("1 5 -1\n");
        let p = write_tmp(dir.path(), "five.mtx", &text);
        let sys = load_matrix_market(&p, &RhsPolicy::Random(3)).unwrap();
        assert_eq!(sys.qubits(), 3);
        assert_eq!(sys.meta().original_dim, 5);
        for i in 5..8 {
            for j in 0..8 {
                let want = if i == j { ONE } else { ZERO };
                assert_eq!(sys.matrix()[(i, j)], want);
                assert_eq!(sys.matrix()[(j, i)], want);
            }
            assert_eq!(sys.rhs()[i], ZERO);
        }
    }

    #[test]
    fn ingestion_rejects_zero_rows_and_reports_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            dir.path(),
            "z.mtx",
            "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 1 1\n3 3 1\n",
        );
        assert!(matches!(
            load_matrix_market(&p, &RhsPolicy::Ones),
            Err(Error::ZeroRow(1))
        ));
        let p = write_tmp(
            dir.path(),
            "bad.mtx",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 oops\n",
        );
        assert!(matches!(
            load_matrix_market(&p, &RhsPolicy::Ones),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn ingestion_caps_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            dir.path(),
            "big.mtx",
            "%%MatrixMarket matrix coordinate real general\n4097 4097 1\n1 1 1\n",
        );
        assert!(matches!(
            load_matrix_market(&p, &RhsPolicy::Ones),
            Err(Error::TooLarge(8192))
        ));
    }

    #[test]
    fn rhs_from_file_is_padded_with_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let m = write_tmp(
            dir.path(),
            "m.mtx",
            "%%MatrixMarket matrix coordinate complex general\n3 3 3\n1 1 1 0\n2 2 0 1\n3 3 2 0\n",
        );
        let r = write_tmp(dir.path(), "b.json", "[[3,0],[0,4],[0,0]]");
        let sys = load_matrix_market(&m, &RhsPolicy::File(r)).unwrap();
        assert!((sys.rhs()[0].re - 0.6).abs() < 1e-15);
        assert!((sys.rhs()[1].im - 0.8).abs() < 1e-15);
        assert_eq!(sys.rhs()[3], ZERO);
        assert_eq!(sys.matrix()[(1, 1)], Complex64::new(0.0, 1.0));
    }

    #[test]
    fn normalize_scales_rhs_and_matrix() {
        let mut a = CMatrix::identity(4, 4);
        a[(0, 0)] = Complex64::new(3.0, 0.0);
        let meta = SystemMeta {
            source: "synthetic".into(),
            original_dim: 4,
            seed: None,
            rhs_scale: 1.0,
            matrix_scale: 1.0,
        };
        let sys = LinearSystem::new("t", a, vec![Complex64::new(2.0, 0.0), ZERO, ZERO, ZERO], meta)
            .unwrap();
        let n = normalize_system(&sys).unwrap();
        assert_eq!(n.rhs()[0], ONE);
        assert!((linalg::frobenius(n.matrix()) - 4.0).abs() < 1e-12);
        assert!((n.meta().rhs_scale - 0.5).abs() < 1e-15);
        assert!((n.meta().matrix_scale - 4.0 / 12f64.sqrt()).abs() < 1e-15);

        let zero = LinearSystem::new("z", CMatrix::identity(2, 2), vec![ZERO; 2], n.meta().clone())
            .unwrap();
        assert!(matches!(normalize_system(&zero), Err(Error::ZeroRhs)));
    }

    #[test]
    fn split_sizes_follow_ratio() {
        let ids = |n: usize| (0..n).map(|i| format!("i{i}")).collect::<Vec<_>>();
        let s = split_dataset(&ids(10), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
        let s = split_dataset(&ids(100), 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (80, 10, 10));
        assert_eq!(split_dataset(&ids(100), 1).unwrap(), s);
        assert!(matches!(split_dataset(&ids(9), 1), Err(Error::TooFewIds(9))));
        for n in 10..200 {
            let s = split_dataset(&ids(n), 5).unwrap();
            let mut all: Vec<_> = s.train.iter().chain(&s.val).chain(&s.test).cloned().collect();
            all.sort();
            let mut want = ids(n);
            want.sort();
            assert_eq!(all, want);
            let ideal = [0.8, 0.1, 0.1].map(|f| f * n as f64);
            for (got, want) in [s.train.len(), s.val.len(), s.test.len()].iter().zip(ideal) {
                assert!((*got as f64 - want).abs() <= 1.0, "n={n}");
            }
        }
    }

    #[test]
    fn instance_directory_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let sys = gen_random_system(4, 0.05, 9).unwrap();
        save_instance(&sys, dir.path()).unwrap();
        assert_eq!(load_instance(dir.path()).unwrap(), sys);
    }
}
