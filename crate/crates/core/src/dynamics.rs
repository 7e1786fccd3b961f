//! The gradient-play iteration on the estimation matrix.
//!
//! Row `i` of the estimation matrix is player `i`'s estimate of the joint
//! action, and entry `(i, i)` is the action it actually plays. One round is
//!
//! ```text
//! x(t+1) = W x(t) - alpha * Diag(g(t)),   g_i(t) = dJ_i/dx_i (row i of x(t))
//! ```
//!
//! Player `i` reads only its own row, its neighbours' rows (through the
//! sparsity of `W`) and its own gradient.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::game::{PlayerGradients, QuadraticGame};
use crate::linalg;
use crate::network::MixingMatrix;
use crate::theory::BoundInputs;

/// A run aborts once the distance to equilibrium exceeds this multiple of
/// its initial value.
pub const DIVERGENCE_FACTOR: f64 = 1e12;

/// Column header of the trace CSV.
pub const TRACE_CSV_HEADER: &str =
    "t,consensus_violation,distance_to_ne,avg_distance_to_ne,grad_norm,lemma1_slack,lemma2_slack,lemma3_slack";

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationMatrix(DMatrix<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initializer {
    /// Every entry uniform on `[-1, 1]`.
    Uniform,
    Zero,
    /// Own action uniform on `[-1, 1]`, estimates of others zero.
    SelfKnowledge,
}

impl EstimationMatrix {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::input("estimation matrix must be square and non-empty"));
        }
        Ok(Self(m))
    }

    /// Every player holds the same estimate `v`.
    pub fn consensual(v: &[f64]) -> Self {
        Self(linalg::consensual(&DVector::from_column_slice(v), v.len()))
    }

    pub fn init(kind: Initializer, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = match kind {
            Initializer::Uniform => DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0)),
            Initializer::Zero => DMatrix::zeros(n, n),
            Initializer::SelfKnowledge => {
                let own: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                DMatrix::from_fn(n, n, |i, j| if i == j { own[i] } else { 0.0 })
            }
        };
        Self(m)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Player `i`'s estimate of the joint action.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    /// The actions actually played (the diagonal).
    pub fn actions(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    /// Frobenius distance to the consensual matrix with rows `v`.
    pub fn distance_to(&self, v: &[f64]) -> f64 {
        linalg::distance_to_consensual(&self.0, &DVector::from_column_slice(v))
    }
}

/// Diagonal of the local-gradient matrix: entry `i` is player `i`'s partial
/// gradient at its own estimate.
pub fn diag_gradient<G: PlayerGradients>(game: &G, x: &EstimationMatrix) -> Result<Vec<f64>> {
    check_len(game.players(), x.n())?;
    Ok((0..x.n())
        .map(|i| game.partial_gradient(i, &x.row(i)))
        .collect())
}

/// One round of gradient play.
pub fn step<G: PlayerGradients>(
    x: &EstimationMatrix,
    w: &MixingMatrix,
    alpha: f64,
    game: &G,
) -> Result<EstimationMatrix> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::input(format!("step size must be positive, got {alpha}")));
    }
    check_len(x.n(), w.n())?;
    let grad = diag_gradient(game, x)?;
    Ok(step_with_gradient(x, w, alpha, &grad))
}

fn step_with_gradient(x: &EstimationMatrix, w: &MixingMatrix, alpha: f64, grad: &[f64]) -> EstimationMatrix {
    let mut next = w.matrix() * &x.0;
    for (i, g) in grad.iter().enumerate() {
        next[(i, i)] -= alpha * g;
    }
    EstimationMatrix(next)
}

/// Mean of all players' estimates (column means).
pub fn running_average(x: &EstimationMatrix) -> Vec<f64> {
    linalg::column_means(&x.0).iter().copied().collect()
}

/// An inequality `lhs <= rhs` measured on a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// Slack normalised by `1 + |rhs|`.
    pub fn relative_slack(&self) -> f64 {
        self.slack() / (1.0 + self.rhs.abs())
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.relative_slack() >= -rel_tol
    }
}

/// Everything measured at iteration `t`. Inequalities relating `t` and
/// `t + 1` are stored on the entry for `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub t: usize,
    /// `||x(t) - xbar(t)||_F`.
    pub consensus_violation: f64,
    /// `||x(t) - x*||_F`.
    pub distance_to_ne: f64,
    /// `||xbar(t) - x*||_F = sqrt(n) ||xbar(t) - x*||`.
    pub avg_distance_to_ne: f64,
    pub grad_norm: f64,
    /// Disagreement after one round:
    /// `||x(t+1) - xbar(t+1)|| <= sigma ||x(t) - xbar(t)|| + alpha sqrt((n-1)/n) ||g(t)||`.
    pub lemma1: Inequality,
    /// Gradient growth: `||g(t)|| <= L ||x(t) - x*||`.
    pub lemma2: Inequality,
    /// Average descent with parameter theta:
    /// `(1 + (2 alpha/n)(mu - theta/2)) ||xbar(t+1) - x*||^2
    ///   <= ||xbar(t) - x*||^2 + (L^2 alpha / theta) ||x(t) - xbar(t)||^2`.
    pub lemma3: Inequality,
    /// `z(t+1) <= Z z(t)` componentwise; absent when sigma is 0.
    pub z_domination: Option<[Inequality; 2]>,
    /// `max_j |xbar(t+1)_j - (xbar(t)_j - (alpha/n) g_j(t))|`, relative to
    /// `1 + max_j |xbar(t)_j|`.
    pub running_average_residual: f64,
}

impl IterationTrace {
    pub fn squared_distance(&self) -> f64 {
        self.distance_to_ne * self.distance_to_ne
    }

    pub fn triangle_gap(&self) -> f64 {
        self.consensus_violation + self.avg_distance_to_ne - self.distance_to_ne
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once `||x(t) - x*||_F <= tol`.
    pub tol: f64,
    pub record: bool,
    /// Parameter of the average-descent inequality; `None` means `mu`.
    pub theta: Option<f64>,
}

impl RunSettings {
    pub fn new(alpha: f64, max_iters: usize) -> Self {
        Self {
            alpha,
            max_iters,
            tol: 0.0,
            record: true,
            theta: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_state: EstimationMatrix,
    pub trace: Vec<IterationTrace>,
    pub iterations: usize,
    pub converged: bool,
    pub initial_distance: f64,
    pub final_distance: f64,
    pub equilibrium: Vec<f64>,
}

impl RunOutcome {
    pub fn relative_error(&self) -> f64 {
        if self.initial_distance == 0.0 {
            0.0
        } else {
            self.final_distance / self.initial_distance
        }
    }
}

/// Iterates gradient play from `x0` until the distance to the equilibrium
/// drops to `tol` or `max_iters` rounds have run.
///
/// With `record` set, every entry of the trace carries the inequality checks
/// evaluated with the exact `mu`, `L` of the game and the `sigma` of `w`.
pub fn run(
    game: &QuadraticGame,
    w: &MixingMatrix,
    x0: EstimationMatrix,
    settings: &RunSettings,
) -> Result<RunOutcome> {
    let n = game.n();
    check_len(n, w.n())?;
    check_len(n, x0.n())?;
    if !(settings.alpha > 0.0) || !settings.alpha.is_finite() {
        return Err(Error::input(format!("step size must be positive, got {}", settings.alpha)));
    }
    if !(settings.tol >= 0.0) {
        return Err(Error::input("tolerance must be non-negative"));
    }
    let equilibrium = game.nash_equilibrium()?;
    let auditor = if settings.record {
        let k = game.constants()?;
        Some(Auditor {
            mu: k.mu,
            l: k.l,
            sigma: w.sigma(),
            theta: settings.theta.unwrap_or(k.mu),
            alpha: settings.alpha,
            n,
            x_star: DVector::from_column_slice(&equilibrium),
        })
    } else {
        None
    };

    let mut x = x0;
    let mut trace = Vec::new();
    let mut t = 0;
    let mut initial_distance = 0.0;
    loop {
        let distance = x.distance_to(&equilibrium);
        if t == 0 {
            initial_distance = distance;
        }
        if !distance.is_finite() || (initial_distance > 0.0 && distance > DIVERGENCE_FACTOR * initial_distance) {
            return Err(Error::Diverged { t, distance });
        }
        let done = distance <= settings.tol || t >= settings.max_iters;
        if done && auditor.is_none() {
            return Ok(RunOutcome {
                final_state: x,
                trace,
                iterations: t,
                converged: distance <= settings.tol,
                initial_distance,
                final_distance: distance,
                equilibrium,
            });
        }
        let grad = diag_gradient(game, &x)?;
        let next = step_with_gradient(&x, w, settings.alpha, &grad);
        if let Some(a) = &auditor {
            trace.push(a.record(t, &x, &next, &grad));
        }
        if done {
            return Ok(RunOutcome {
                final_state: x,
                trace,
                iterations: t,
                converged: distance <= settings.tol,
                initial_distance,
                final_distance: distance,
                equilibrium,
            });
        }
        x = next;
        t += 1;
    }
}

struct Auditor {
    mu: f64,
    l: f64,
    sigma: f64,
    theta: f64,
    alpha: f64,
    n: usize,
    x_star: DVector<f64>,
}

impl Auditor {
    fn record(&self, t: usize, x: &EstimationMatrix, next: &EstimationMatrix, grad: &[f64]) -> IterationTrace {
        let nf = self.n as f64;
        let alpha = self.alpha;
        let avg = linalg::column_means(&x.0);
        let avg_next = linalg::column_means(&next.0);
        let cons = linalg::distance_to_consensual(&x.0, &avg);
        let cons_next = linalg::distance_to_consensual(&next.0, &avg_next);
        let dist = linalg::distance_to_consensual(&x.0, &self.x_star);
        let avg_dist = nf.sqrt() * (&avg - &self.x_star).norm();
        let avg_dist_next = nf.sqrt() * (&avg_next - &self.x_star).norm();
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();

        let lemma1 = Inequality {
            lhs: cons_next,
            rhs: self.sigma * cons + alpha * ((nf - 1.0) / nf).sqrt() * grad_norm,
        };
        let lemma2 = Inequality {
            lhs: grad_norm,
            rhs: self.l * dist,
        };
        let lemma3 = Inequality {
            lhs: (1.0 + (2.0 * alpha / nf) * (self.mu - 0.5 * self.theta)) * avg_dist_next.powi(2),
            rhs: avg_dist.powi(2) + (self.l * self.l * alpha / self.theta) * cons * cons,
        };

        let z_domination = (self.sigma > 0.0 && self.sigma < 1.0).then(|| {
            let z = BoundInputs::new(self.mu, self.l, self.sigma, self.n).z_unchecked(alpha);
            let bound = z * Vector2::new(avg_dist * avg_dist, cons * cons);
            [
                Inequality {
                    lhs: avg_dist_next * avg_dist_next,
                    rhs: bound[0],
                },
                Inequality {
                    lhs: cons_next * cons_next,
                    rhs: bound[1],
                },
            ]
        });

        let scale = 1.0 + avg.amax();
        let running_average_residual = (0..self.n)
            .map(|j| (avg_next[j] - (avg[j] - alpha / nf * grad[j])).abs())
            .fold(0.0, f64::max)
            / scale;

        IterationTrace {
            t,
            consensus_violation: cons,
            distance_to_ne: dist,
            avg_distance_to_ne: avg_dist,
            grad_norm,
            lemma1,
            lemma2,
            lemma3,
            z_domination,
            running_average_residual,
        }
    }
}

/// Writes the trace as CSV with shortest round-trip decimals.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &[IterationTrace]) -> std::io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for e in trace {
        let f = linalg::fmt_f64;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.t,
            f(e.consensus_violation),
            f(e.distance_to_ne),
            f(e.avg_distance_to_ne),
            f(e.grad_norm),
            f(e.lemma1.slack()),
            f(e.lemma2.slack()),
            f(e.lemma3.slack()),
        )?;
    }
    Ok(())
}

pub fn trace_csv(trace: &[IterationTrace]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, trace).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}
