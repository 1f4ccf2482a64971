use thiserror::Error;

/// Errors produced by the waveform, decoupling, detection and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("roll-off factor {0} is outside [0, 1]")]
    RollOff(f64),

    #[error("prototype filter has no compact frequency support of width M")]
    NotIciFree,

    #[error("matrix is rank deficient: column residual {residual:.3e} below threshold {threshold:.3e}")]
    Singular { residual: f64, threshold: f64 },

    #[error("exhaustive search needs {candidates} candidates, budget is {budget}")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unknown constellation `{0}`")]
    UnknownConstellation(String),

    #[error("{0}")]
    Config(String),

    #[error("nothing to report")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
