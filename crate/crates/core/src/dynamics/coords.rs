//! Real coordinates for Hermitian matrices: the D diagonal entries followed
//! by (Re, Im) of each upper-triangle entry. A Lindblad generator maps
//! Hermitian matrices to Hermitian matrices, so it acts as a real D²×D²
//! matrix in these coordinates.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::model::Superoperator;

#[derive(Debug, Clone)]
pub struct HermitianCoords {
    dim: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianCoords {
    pub fn new(dim: usize) -> Self {
        let pairs = (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect();
        Self { dim, pairs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of real coordinates, D².
    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// Coordinate index of the diagonal entry (i, i); these are the entries
    /// whose sum is the trace.
    pub fn diagonal_index(&self, i: usize) -> usize {
        i
    }

    pub fn to_coords(&self, m: &Array2<C64>) -> Array1<f64> {
        let mut x = Array1::zeros(self.len());
        for i in 0..self.dim {
            x[i] = m[[i, i]].re;
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            x[self.dim + 2 * k] = m[[i, j]].re;
            x[self.dim + 2 * k + 1] = m[[i, j]].im;
        }
        x
    }

    pub fn from_coords(&self, x: &Array1<f64>) -> Array2<C64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for i in 0..self.dim {
            m[[i, i]] = C64::new(x[i], 0.0);
        }
        for (k, &(i, j)) in self.pairs.iter().enumerate() {
            let z = C64::new(x[self.dim + 2 * k], x[self.dim + 2 * k + 1]);
            m[[i, j]] = z;
            m[[j, i]] = z.conj();
        }
        m
    }

    /// Matrix of `sup` restricted to Hermitian inputs, in these coordinates.
    pub fn real_generator(&self, sup: &Superoperator) -> Array2<f64> {
        assert_eq!(sup.dim(), self.dim, "superoperator dimension");
        let d = self.dim;
        let l = sup.as_array();
        let vec_index = |i: usize, j: usize| i + j * d;

        // Basis inputs: E_ii, E_ij + E_ji, i(E_ij − E_ji).
        enum Input {
            Diag(usize),
            Re(usize, usize),
            Im(usize, usize),
        }
        let mut inputs: Vec<Input> = (0..d).map(|i| Input::Diag(vec_index(i, i))).collect();
        for &(i, j) in &self.pairs {
            inputs.push(Input::Re(vec_index(i, j), vec_index(j, i)));
            inputs.push(Input::Im(vec_index(i, j), vec_index(j, i)));
        }
        // Output rows: (row of vec, take imaginary part).
        let mut outputs: Vec<(usize, bool)> = (0..d).map(|i| (vec_index(i, i), false)).collect();
        for &(i, j) in &self.pairs {
            outputs.push((vec_index(i, j), false));
            outputs.push((vec_index(i, j), true));
        }

        let n = self.len();
        let mut r = Array2::zeros((n, n));
        for (o, &(row, imag)) in outputs.iter().enumerate() {
            let lrow = l.row(row);
            for (c, input) in inputs.iter().enumerate() {
                let z = match *input {
                    Input::Diag(p) => lrow[p],
                    Input::Re(p, q) => lrow[p] + lrow[q],
                    Input::Im(p, q) => C64::new(0.0, 1.0) * (lrow[p] - lrow[q]),
                };
                r[[o, c]] = if imag { z.im } else { z.re };
            }
        }
        r
    }
}
