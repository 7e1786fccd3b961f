//! Small dense helpers shared by the network, dynamics and harness layers.

use nalgebra::{DMatrix, DVector};

/// Smallest eigenvalue of the symmetric part `(m + m^T) / 2`.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Largest singular value (spectral norm).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `m - (1/n) 1 1^T`, the matrix restricted to the disagreement subspace.
pub fn deflate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let inv = 1.0 / n as f64;
    m.map(|v| v - inv)
}

/// Column means of `m`.
pub fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum() / n))
}

/// Square matrix whose rows all equal `v`.
pub fn consensual(v: &DVector<f64>, rows: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, v.len(), |_, j| v[j])
}

/// Frobenius distance between `a` and the consensual matrix with rows `v`.
pub fn distance_to_consensual(a: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = a[(i, j)] - v[j];
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Shortest decimal representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
