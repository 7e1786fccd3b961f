//! Distributed gradient play for learning Nash equilibria of strongly
//! monotone games over a communication graph.
//!
//! Every player keeps an estimate of the full joint action. One round mixes
//! neighbours' estimates through a doubly stochastic matrix `W` and then moves
//! the player's own coordinate along its partial gradient:
//!
//! ```text
//! x(t+1) = W x(t) - alpha * Diag(grad_1 J_1(x_(1)), ..., grad_n J_n(x_(n)))
//! ```
//!
//! The crate is split into
//!
//! * [`game`]: quadratic games, the game mapping and exact constants (mu, L_i, x*),
//! * [`network`]: graphs, Metropolis mixing matrices and the spectral quantity sigma,
//! * [`dynamics`]: the iteration itself with per-step invariant traces,
//! * [`theory`]: closed-form step-size ceilings and contraction rates,
//! * [`analysis`]: envelope and log-linear fits over recorded traces,
//! * [`harness`]: configuration-driven experiments and the batch audit.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod theory;

pub use error::{Error, Result};
pub use game::{GameConstants, PlayerGradients, QuadraticGame};
pub use network::{Graph, MixingMatrix};
