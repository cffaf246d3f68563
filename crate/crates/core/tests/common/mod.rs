#![allow(dead_code)]

use entangle_core::hilbert::{DensityMatrix, Operator, StateVector};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

/// Entries for a random d×d complex matrix.
pub fn complex_entries(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
}

pub fn matrix_from(entries: &[(f64, f64)], d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |(i, j)| {
        let (re, im) = entries[i * d + j];
        C64::new(re, im)
    })
}

/// A A† / tr(A A†): full-rank with probability one.
pub fn density_from(entries: &[(f64, f64)], d: usize) -> DensityMatrix {
    let a = matrix_from(entries, d);
    let m = a.dot(&a.t().mapv(|z| z.conj()));
    let tr: C64 = m.diag().sum();
    DensityMatrix::new(Operator::from_array(m / tr).unwrap()).unwrap()
}

pub fn state_from(entries: &[(f64, f64)]) -> StateVector {
    let v: Array1<C64> = entries.iter().map(|&(re, im)| C64::new(re, im)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_array(v / C64::new(n, 0.0))
}

/// exp(−iθ n̂·σ) for a single qubit.
pub fn qubit_unitary(theta: f64, axis: (f64, f64, f64)) -> Array2<C64> {
    let (x, y, z) = axis;
    let n = (x * x + y * y + z * z).sqrt();
    let (x, y, z) = if n < 1e-6 { (0.0, 0.0, 1.0) } else { (x / n, y / n, z / n) };
    let (c, s) = (theta.cos(), theta.sin());
    let i = C64::new(0.0, 1.0);
    ndarray::array![
        [C64::new(c, 0.0) - i * s * z, -i * s * C64::new(x, -y)],
        [-i * s * C64::new(x, y), C64::new(c, 0.0) + i * s * z],
    ]
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (m, n) = (a.nrows(), b.nrows());
    Array2::from_shape_fn((m * n, m * n), |(i, j)| a[[i / n, j / n]] * b[[i % n, j % n]])
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// All eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &Array2<C64>) -> Vec<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]]).eigenvalues().unwrap()
}

/// exp(−iHt) by scaling and squaring a Taylor series.
pub fn unitary_propagator(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let n = h.nrows();
    let norm = h.iter().map(|z| z.norm()).sum::<f64>() * t.abs();
    let squarings = norm.max(1.0).log2().ceil() as i32 + 4;
    let a = h.mapv(|z| z * C64::new(0.0, -t / 2f64.powi(squarings)));
    let mut term = Array2::<C64>::eye(n);
    let mut sum = Array2::<C64>::eye(n);
    for k in 1..30 {
        term = term.dot(&a).mapv(|z| z / k as f64);
        sum = sum + &term;
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}
