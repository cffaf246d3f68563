use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::hilbert::Operator;

/// Coordinate-list view of a mostly-zero operator, used to apply the
/// generator without forming D²×D² superoperators.
#[derive(Debug, Clone)]
pub(crate) struct SparseOp {
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn from_operator(op: &Operator) -> Self {
        let entries = op
            .as_array()
            .indexed_iter()
            .filter(|(_, z)| z.norm() != 0.0)
            .map(|((i, j), &z)| (i, j, z))
            .collect();
        Self { entries }
    }

    /// out += scale · A ρ
    pub fn left_mul_acc(&self, rho: &Array2<C64>, out: &mut Array2<C64>, scale: C64) {
        for &(i, k, v) in &self.entries {
            let f = scale * v;
            let src = rho.row(k);
            let mut dst = out.row_mut(i);
            dst.zip_mut_with(&src, |d, s| *d += f * s);
        }
    }

    /// out += scale · ρ A
    pub fn right_mul_acc(&self, rho: &Array2<C64>, out: &mut Array2<C64>, scale: C64) {
        for &(i, k, v) in &self.entries {
            let f = scale * v;
            let src = rho.column(i);
            let mut dst = out.column_mut(k);
            dst.zip_mut_with(&src, |d, s| *d += f * s);
        }
    }
}
