use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("game is not strongly monotone: smallest eigenvalue of the symmetric part is {mu:e}")]
    NotStronglyMonotone { mu: f64 },

    #[error("singular linear system")]
    Singular,

    #[error("communication graph is not connected")]
    Disconnected,

    #[error("perfect mixing (sigma = 0): step-size bound terms degenerate")]
    DegenerateMixing,

    #[error("mixing matrix does not contract disagreement (sigma = {sigma})")]
    NoContraction { sigma: f64 },

    #[error("inadmissible step size {alpha:e}: must lie in (0, {alpha_max:e})")]
    InadmissibleStepSize { alpha: f64, alpha_max: f64 },

    #[error("iteration diverged at t = {t} (distance to equilibrium {distance:e})")]
    Diverged { t: usize, distance: f64 },

    #[error("condition number L*sqrt(n)/mu = {kappa} is below 1; constants are inconsistent")]
    ConditionNumber { kappa: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}
