//! Thin wrappers over the dense solvers plus a tridiagonal inertia count.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("eigensolver did not converge")]
    EigenFailed,
    #[error("singular value decomposition did not converge")]
    SvdFailed,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Eigenvalues and right eigenvectors (columns) of a general real matrix.
pub fn eigen(m: &Mat<f64>) -> Result<(Vec<Complex<f64>>, Mat<Complex<f64>>), LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare(m.nrows(), m.ncols()));
    }
    let evd = m.eigen().map_err(|_| LinalgError::EigenFailed)?;
    let s = evd.S();
    let vals = (0..m.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn eigenvalues(m: &Mat<f64>) -> Result<Vec<Complex<f64>>, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare(m.nrows(), m.ncols()));
    }
    m.eigenvalues().map_err(|_| LinalgError::EigenFailed)
}

/// Ascending eigenvalues of a symmetric matrix (lower triangle is read).
pub fn symmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>, LinalgError> {
    if m.nrows() != m.ncols() {
        return Err(LinalgError::NotSquare(m.nrows(), m.ncols()));
    }
    m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| LinalgError::EigenFailed)
}

pub fn smallest_singular_value(m: &Mat<f64>) -> Result<f64, LinalgError> {
    let s = m.singular_values().map_err(|_| LinalgError::SvdFailed)?;
    Ok(s.last().copied().unwrap_or(0.0))
}

pub fn largest_singular_value(m: &Mat<f64>) -> Result<f64, LinalgError> {
    let s = m.singular_values().map_err(|_| LinalgError::SvdFailed)?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Solves `a x = b` by partial-pivot LU.
pub fn solve(a: &Mat<f64>, b: &Mat<f64>) -> Result<Mat<f64>, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare(a.nrows(), a.ncols()));
    }
    if b.nrows() != a.nrows() {
        return Err(LinalgError::Dimension(format!(
            "rhs has {} rows, matrix has {}",
            b.nrows(),
            a.nrows()
        )));
    }
    Ok(a.partial_piv_lu().solve(b))
}

/// Tridiagonal matrix stored by diagonals. `lower[i]` is entry (i+1, i), `upper[i]` is (i, i+1).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> Tridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// True when every off-diagonal product is positive, so the matrix is similar to a
    /// symmetric one by a positive diagonal scaling.
    pub fn is_symmetrizable(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(&l, &u)| l * u > T::zero())
    }

    /// Number of negative pivots of `self + diag(shift)`; for a symmetrizable matrix this is
    /// the number of negative eigenvalues.
    pub fn negative_count_shifted(&self, shift: impl Fn(usize) -> T) -> usize {
        let n = self.len();
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..n {
            let d = self.diag[i] + shift(i);
            q = if i == 0 { d } else { d - self.lower[i - 1] * self.upper[i - 1] / q };
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    pub fn negative_count(&self) -> usize {
        self.negative_count_shifted(|_| T::zero())
    }

    pub fn mul_vec(&self, u: &[T]) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * u[i];
                if i > 0 {
                    s = s + self.lower[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    s = s + self.upper[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |i, j| {
            let v = if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.lower[j]
            } else if j == i + 1 {
                self.upper[i]
            } else {
                T::zero()
            };
            v.to_f64_lossy()
        })
    }
}
