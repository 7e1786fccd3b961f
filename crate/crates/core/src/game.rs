//! Quadratic games with scalar actions.
//!
//! Player `i` minimises `J_i(x) = 0.5 a_i x_i^2 + b_i x_i + (sum_{j != i} c_ij x_j) x_i`,
//! so the stacked partial gradients form the affine game mapping `F(x) = A x + b`
//! with `A_ii = a_i` and `A_ij = c_ij`. All constants the convergence analysis
//! needs (mu, L_i, the equilibrium) have closed forms for this class.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;

/// Anything that can report each player's partial gradient in its own action.
///
/// The iteration in [`crate::dynamics`] only needs this; exact equilibria and
/// constants are available for [`QuadraticGame`].
pub trait PlayerGradients {
    fn players(&self) -> usize;

    /// `d J_i / d x_i` evaluated at the joint action `x` (length `players()`).
    fn partial_gradient(&self, i: usize, x: &[f64]) -> f64;
}

/// Adapts a closure `(i, x) -> d J_i / d x_i` to [`PlayerGradients`].
pub struct FnGradients<F> {
    pub n: usize,
    pub f: F,
}

impl<F> PlayerGradients for FnGradients<F>
where
    F: Fn(usize, &[f64]) -> f64,
{
    fn players(&self) -> usize {
        self.n
    }

    fn partial_gradient(&self, i: usize, x: &[f64]) -> f64 {
        (self.f)(i, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticGame {
    a: Vec<f64>,
    b: Vec<f64>,
    /// Row-major `n x n` coupling matrix with zero diagonal.
    c: Vec<f64>,
    seed: Option<u64>,
    matrix: DMatrix<f64>,
}

/// On-disk form of a [`QuadraticGame`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConstants {
    /// Strong monotonicity constant of the game mapping.
    pub mu: f64,
    /// Lipschitz constant of each player's partial gradient.
    pub l_per_player: Vec<f64>,
    pub l: f64,
    /// Lipschitz constant of the whole mapping, `l * sqrt(n)`.
    pub l_mapping: f64,
    pub kappa: f64,
}

impl QuadraticGame {
    /// Builds a game from its coefficients. `c` is row-major `n x n`.
    ///
    /// Structural invariants (lengths, zero diagonal, positive `a_i`, finite
    /// values) are enforced here. Strong monotonicity is checked by
    /// [`QuadraticGame::constants`].
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::input("game needs at least one player"));
        }
        check_len(n, b.len())?;
        check_len(n * n, c.len())?;
        if a.iter().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::input("game coefficients must be finite"));
        }
        if let Some(i) = a.iter().position(|&v| v <= 0.0) {
            return Err(Error::input(format!("a[{i}] = {} is not positive", a[i])));
        }
        if let Some(i) = (0..n).find(|&i| c[i * n + i] != 0.0) {
            return Err(Error::input(format!("coupling diagonal c[{i}][{i}] must be zero")));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| if i == j { a[i] } else { c[i * n + j] });
        Ok(Self {
            a,
            b,
            c,
            seed: None,
            matrix,
        })
    }

    /// Random strongly monotone game.
    ///
    /// `a_i ~ U[1, 2]`, `b_i ~ U[-1, 1]`, `c_ij ~ coupling_scale * U[-1, 1]`.
    /// Rows whose off-diagonal mass exceeds `0.9 a_i` are shrunk onto that
    /// budget. If the symmetric part `(A + A^T)/2` is still not diagonally
    /// dominant with the same margin, the whole coupling is scaled down until
    /// it is, so Gershgorin gives `mu >= 0.1 * min a_i`.
    pub fn random(n: usize, seed: u64, coupling_scale: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("random game needs n >= 2, got {n}")));
        }
        if !(coupling_scale >= 0.0) || !coupling_scale.is_finite() {
            return Err(Error::input("coupling_scale must be finite and non-negative"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    c[i * n + j] = coupling_scale * rng.gen_range(-1.0..=1.0);
                }
            }
        }

        for i in 0..n {
            let row: f64 = c[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum();
            let budget = 0.9 * a[i];
            if row > budget {
                let s = budget / row;
                c[i * n..(i + 1) * n].iter_mut().for_each(|v| *v *= s);
            }
        }

        let mut shrink: f64 = 1.0;
        for i in 0..n {
            let sym_row: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| 0.5 * (c[i * n + j] + c[j * n + i]).abs())
                .sum();
            if sym_row > 0.9 * a[i] {
                shrink = shrink.min(0.9 * a[i] / sym_row);
            }
        }
        if shrink < 1.0 {
            c.iter_mut().for_each(|v| *v *= shrink);
        }

        let mut game = Self::new(a, b, c)?;
        game.seed = Some(seed);
        Ok(game)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Coupling coefficient `c_ij` (zero on the diagonal).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.c[i * self.n() + j]
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// The matrix `A` of the affine mapping `F(x) = A x + b`.
    pub fn mapping_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `F(x)`, the stacked partial gradients.
    pub fn mapping(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        Ok((0..self.n()).map(|i| self.partial_unchecked(i, x)).collect())
    }

    /// Player `i`'s partial gradient at its local estimate `x_local`.
    /// Indices are zero-based.
    pub fn local_gradient(&self, i: usize, x_local: &[f64]) -> Result<f64> {
        check_len(self.n(), x_local.len())?;
        if i >= self.n() {
            return Err(Error::input(format!(
                "player index {i} out of range for {} players",
                self.n()
            )));
        }
        Ok(self.partial_unchecked(i, x_local))
    }

    fn partial_unchecked(&self, i: usize, x: &[f64]) -> f64 {
        let n = self.n();
        let row = &self.c[i * n..(i + 1) * n];
        let coupling: f64 = row.iter().zip(x).map(|(c, x)| c * x).sum();
        self.a[i] * x[i] + self.b[i] + coupling
    }

    /// Exact monotonicity and Lipschitz constants.
    ///
    /// `mu` is the smallest eigenvalue of `(A + A^T)/2`; `L_i` is the Euclidean
    /// norm of row `i` of `A`, which is the tight Lipschitz constant of the
    /// affine partial gradient.
    pub fn constants(&self) -> Result<GameConstants> {
        let mu = linalg::min_symmetric_eigenvalue(&self.matrix);
        if !(mu > 0.0) {
            return Err(Error::NotStronglyMonotone { mu });
        }
        let l_per_player: Vec<f64> = self.matrix.row_iter().map(|r| r.norm()).collect();
        let l = l_per_player.iter().copied().fold(0.0, f64::max);
        let l_mapping = l * (self.n() as f64).sqrt();
        Ok(GameConstants {
            mu,
            l_per_player,
            l,
            l_mapping,
            kappa: l_mapping / mu,
        })
    }

    /// The unique Nash equilibrium: the root of `A x + b = 0`.
    pub fn nash_equilibrium(&self) -> Result<Vec<f64>> {
        let rhs = -DVector::from_column_slice(&self.b);
        let lu = self.matrix.clone().lu();
        let mut x = lu.solve(&rhs).ok_or(Error::Singular)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        // one step of iterative refinement
        let residual = &self.matrix * &x - &rhs;
        if let Some(dx) = lu.solve(&residual) {
            x -= dx;
        }
        Ok(x.iter().copied().collect())
    }

    pub fn to_document(&self) -> GameDocument {
        GameDocument {
            n: self.n(),
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            seed: self.seed,
        }
    }

    pub fn from_document(doc: GameDocument) -> Result<Self> {
        if doc.n != doc.a.len() {
            return Err(Error::Dimension {
                expected: doc.n,
                got: doc.a.len(),
            });
        }
        let mut game = Self::new(doc.a, doc.b, doc.c)?;
        game.seed = doc.seed;
        Ok(game)
    }

    /// Serialises to JSON. Floats use shortest round-trip decimals, so
    /// [`QuadraticGame::from_json`] reproduces every coefficient bit for bit.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("game document serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GameDocument =
            serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        Self::from_document(doc)
    }
}

impl PlayerGradients for QuadraticGame {
    fn players(&self) -> usize {
        self.n()
    }

    fn partial_gradient(&self, i: usize, x: &[f64]) -> f64 {
        self.partial_unchecked(i, x)
    }
}
