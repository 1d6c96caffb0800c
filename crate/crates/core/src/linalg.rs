//! Small dense helpers on top of `nalgebra` shared by the model modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Returns `(A + Aᵀ) / 2`. Panics if `a` is not square.
pub fn symmetrize(a: &Matrix) -> Matrix {
    assert!(a.is_square(), "symmetrize requires a square matrix");
    let n = a.nrows();
    Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// `H Σ Hᵀ`, symmetrized.
pub fn congruence(h: &Matrix, sigma: &Matrix) -> Result<Matrix> {
    if h.ncols() != sigma.nrows() || !sigma.is_square() {
        return Err(Error::Dimension(format!(
            "H is {}x{} but covariance is {}x{}",
            h.nrows(),
            h.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    Ok(symmetrize(&(h * sigma * h.transpose())))
}

pub fn cholesky(a: &Matrix, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(a)).ok_or(Error::NotPositiveDefinite(what))
}

/// `ln |A|` of a symmetric positive-definite matrix via its Cholesky factor.
pub fn logdet_spd(a: &Matrix, what: &'static str) -> Result<f64> {
    let chol = cholesky(a, what)?;
    Ok(logdet_from_cholesky(&chol))
}

pub fn logdet_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// `tr(A B)` without forming the product.
pub fn trace_of_product(a: &Matrix, b: &Matrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigenvalues of a symmetric matrix, sorted in decreasing order.
pub fn eigenvalues_desc(a: &Matrix) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrize(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Largest absolute asymmetry `max |A_ij − A_ji|`.
pub fn asymmetry(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn ensure_square(a: &Matrix, what: &str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

pub(crate) fn ensure_same_shape(a: &Matrix, b: &Matrix, what: &str) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what}: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )))
    }
}
