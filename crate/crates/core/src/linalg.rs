//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn frobenius_sq(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn ensure_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical(format!("{what} contains non-finite entries")))
    }
}

pub fn ensure_dims(m: &ComplexMatrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.nrows() == rows && m.ncols() == cols {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: expected {rows}x{cols}, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Singular values and right singular vectors, ordered by decreasing
/// singular value. Only `min(rows, cols)` directions are returned.
pub fn right_singular(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.ncols();
    if m.nrows() == 0 || n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(n, 0));
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = ComplexMatrix::zeros(n, order.len());
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            v[(r, dst)] = v_t[(src, r)].conj();
        }
    }
    (values, v)
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Ratio of largest to smallest singular value; infinite for rank-deficient input.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
pub fn hpd_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hpd_cholesky(m)?.inverse())
}

/// Cholesky factorization that also rejects factors with non-real or
/// non-positive pivots (complex square roots would otherwise accept
/// indefinite input).
pub fn hpd_cholesky(m: &ComplexMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    let not_pd = || Error::Numerical("matrix is not Hermitian positive definite".into());
    let chol = m.clone().cholesky().ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0) || d.im.abs() > 1e-12 * d.re {
            return Err(not_pd());
        }
    }
    Ok(chol)
}

/// `log2 det(m)` for a Hermitian positive definite matrix.
pub fn log2det_hpd(m: &ComplexMatrix) -> Result<f64> {
    let chol = hpd_cholesky(m)?;
    let l = chol.l_dirty();
    Ok((0..m.nrows()).map(|i| 2.0 * l[(i, i)].re.log2()).sum())
}

/// Hermitian part `(m + m^H)/2`; removes rounding asymmetry before Cholesky.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Sample covariance `X X^H / T` of the columns of `x`.
pub fn sample_covariance(x: &ComplexMatrix) -> ComplexMatrix {
    let t = x.ncols().max(1) as f64;
    hermitize(&(x * x.adjoint()).unscale(t))
}

/// Orthogonal projector onto the complement of the column span of `v`
/// (columns assumed orthonormal).
pub fn complement_projector(v: &ComplexMatrix) -> ComplexMatrix {
    let n = v.nrows();
    ComplexMatrix::identity(n, n) - v * v.adjoint()
}

/// Orthonormal basis of the column span of `m`, keeping directions whose
/// singular value exceeds `tol` times the largest.
pub fn orthonormal_basis(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    if m.ncols() == 0 || m.nrows() == 0 {
        return ComplexMatrix::zeros(m.nrows(), 0);
    }
    // Left singular vectors of m are right singular vectors of m^H.
    let (s, u) = right_singular(&m.adjoint());
    let top = s.first().copied().unwrap_or(0.0);
    let keep = s.iter().filter(|&&x| top > 0.0 && x > tol * top).count();
    u.columns(0, keep).into_owned()
}

pub fn column_norms_sq(m: &ComplexMatrix) -> Vec<f64> {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

pub fn row_norms_sq(m: &ComplexMatrix) -> Vec<f64> {
    m.row_iter().map(|row| row.iter().map(|z| z.norm_sqr()).sum()).collect()
}
