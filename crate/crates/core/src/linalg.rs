//! Thin bridge between the ndarray storage used throughout the crate and
//! faer's dense factorizations.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("eigenvalue decomposition did not converge")]
    NoConvergence,
}

fn to_faer(a: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order. Only the lower
/// triangle is read.
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Result<Vec<f64>, LinalgError> {
    to_faer(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| LinalgError::NoConvergence)
}

/// Eigenvalues (nondecreasing) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix. Only the lower triangle is read.
pub fn hermitian_eigen(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>), LinalgError> {
    let evd = to_faer(a).self_adjoint_eigen(Side::Lower).map_err(|_| LinalgError::NoConvergence)?;
    let n = a.nrows();
    let values = (0..n).map(|i| evd.S()[i].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| evd.U()[(i, j)]);
    Ok((values, vectors))
}

/// Singular values of a complex matrix in nonincreasing order.
pub fn singular_values(a: &Array2<C64>) -> Result<Vec<f64>, LinalgError> {
    let mut s = to_faer(a).singular_values().map_err(|_| LinalgError::NoConvergence)?;
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// LU factorization (partial pivoting) of a dense real matrix, kept for
/// repeated solves.
pub struct RealLu {
    lu: faer::linalg::solvers::PartialPivLu<f64>,
    dim: usize,
}

impl RealLu {
    pub fn new(a: &Array2<f64>) -> Self {
        let m = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]]);
        Self { lu: m.partial_piv_lu(), dim: a.nrows() }
    }

    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let mut rhs = Mat::from_fn(self.dim, 1, |i, _| b[i]);
        self.lu.solve_in_place(&mut rhs);
        Array1::from_shape_fn(self.dim, |i| rhs[(i, 0)])
    }

    /// Smallest over largest |U_ii|; near zero for a numerically singular
    /// matrix.
    pub fn pivot_ratio(&self) -> f64 {
        let u = self.lu.U();
        let diag: Vec<f64> = (0..self.dim).map(|i| u[(i, i)].abs()).collect();
        let max = diag.iter().copied().fold(0.0, f64::max);
        let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if max == 0.0 { 0.0 } else { min / max }
    }

    pub fn solve_in_place(&self, b: &mut Array1<f64>) {
        let mut rhs = Mat::from_fn(self.dim, 1, |i, _| b[i]);
        self.lu.solve_in_place(&mut rhs);
        for (i, v) in b.iter_mut().enumerate() {
            *v = rhs[(i, 0)];
        }
    }
}
