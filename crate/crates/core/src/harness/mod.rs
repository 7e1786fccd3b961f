//! Configuration-driven experiments: build a game and a network, pick a step
//! size, run gradient play, and report on every invariant along the way.

mod audit;
mod config;
mod experiment;
mod plot;

pub use audit::{audit, AuditConfig, AuditReport, CellReport, CheckOutcome, CheckSummary, Failure};
pub use config::{AlphaSpec, ExperimentConfig, PAPER_SIM_ALPHA};
pub use experiment::{run_experiment, ExperimentReport, Summary, Violation};
pub use plot::gnuplot_script;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GRADPLAY_OUT_DIR";

/// Relative tolerance applied to every inequality check.
pub const CHECK_TOL: f64 = 1e-9;
