//! Small dense linear-algebra helpers over complex amplitudes.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; vectors are plain slices so the
//! simulator can index them by bit pattern.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `log2(n)` when `n` is a power of two.
pub fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// `⟨u|v⟩`, conjugating the left argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    norm_sq(v).sqrt()
}

/// Dense `A v`.
pub fn matvec(a: &CMatrix, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.ncols() != v.len() {
        return Err(Error::Dimension {
            expected: a.ncols(),
            got: v.len(),
        });
    }
    let mut out = vec![ZERO; a.nrows()];
    // column-major storage: accumulate column by column
    for (j, vj) in v.iter().enumerate() {
        if *vj == ZERO {
            continue;
        }
        for (o, aij) in out.iter_mut().zip(a.column(j).iter()) {
            *o += aij * vj;
        }
    }
    Ok(out)
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values of `A`, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// 2-norm condition number estimate `σ_max / σ_min` (infinite when singular).
pub fn condition(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Moore-Penrose pseudoinverse applied to `b`, discarding singular values
/// below `rel_cutoff · σ_max`.
pub fn pinv_apply(a: &CMatrix, b: &[Complex64], rel_cutoff: f64) -> Result<Vec<Complex64>> {
    if a.nrows() != b.len() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let s_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_cutoff * s_max;
    let mut x = vec![ZERO; a.ncols()];
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        // coefficient (u_k^† b) / s_k along right singular vector v_k
        let coef: Complex64 = u
            .column(k)
            .iter()
            .zip(b)
            .map(|(uk, bi)| uk.conj() * bi)
            .sum::<Complex64>()
            / s;
        // v_t row k holds v_k^†
        for (xi, vt) in x.iter_mut().zip(v_t.row(k).iter()) {
            *xi += vt.conj() * coef;
        }
    }
    Ok(x)
}

/// Dense solve `A x = b` with partial-pivot LU.
pub fn solve(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = a
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular(f64::INFINITY))?;
    Ok(x.iter().copied().collect())
}

/// Scale `v` to unit 2-norm in place, returning the original norm.
pub fn normalize(v: &mut [Complex64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}
