//! Reference computations that share no code with the library: plain
//! `Vec<Vec<f64>>` matrices, cyclic Jacobi for symmetric spectra, closed-form
//! 2x2 eigenvalues and Gaussian elimination.

#![allow(dead_code)]

use gradplay::QuadraticGame;
use rand::Rng;

pub type Mat = Vec<Vec<f64>>;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &Mat) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Real eigenvalues `(larger, smaller)` of a 2x2 matrix with real spectrum.
pub fn eig2(m: [[f64; 2]; 2]) -> (f64, f64) {
    assert!(m[0][1] * m[1][0] >= 0.0, "oracle expects a real spectrum");
    let tr = m[0][0] + m[1][1];
    let half_gap = ((m[0][0] - m[1][1]) / 2.0).hypot((m[0][1] * m[1][0]).sqrt());
    (tr / 2.0 + half_gap, tr / 2.0 - half_gap)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Mat, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Mat = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..=n {
                m[r][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// The game's mapping matrix rebuilt from its public coefficients.
pub fn mapping_matrix(game: &QuadraticGame) -> Mat {
    let n = game.n();
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { game.a()[i] } else { game.coupling(i, j) }).collect())
        .collect()
}

pub fn symmetric_part(a: &Mat) -> Mat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| 0.5 * (a[i][j] + a[j][i])).collect()).collect()
}

/// `W - (1/n) 11^T` as nested vectors.
pub fn deflated(w: &nalgebra::DMatrix<f64>) -> Mat {
    let n = w.nrows();
    (0..n)
        .map(|i| (0..n).map(|j| w[(i, j)] - 1.0 / n as f64).collect())
        .collect()
}

/// Largest `|lambda|` of a symmetric `W - (1/n) 11^T`.
pub fn sigma_symmetric(w: &nalgebra::DMatrix<f64>) -> f64 {
    jacobi_eigenvalues(&deflated(w)).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Random `(mu, L, sigma, n)` with `0 < mu <= L`, `sigma` in `(0, 1)`.
pub fn random_tuple<R: Rng>(rng: &mut R) -> (f64, f64, f64, usize) {
    let mu = 10f64.powf(rng.gen_range(-2.0..1.0));
    let l = mu * 10f64.powf(rng.gen_range(0.0..1.5));
    let sigma = rng.gen_range(0.01..0.99);
    let n = rng.gen_range(2..60);
    (mu, l, sigma, n)
}
