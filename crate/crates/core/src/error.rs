use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model, program or hyperparameter input.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Vector or matrix dimensions do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A sampling operation was asked for more draws than the source holds.
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    /// Fixed decisions handed to an instantiation violate the program.
    #[error("infeasible history: {0}")]
    InfeasibleHistory(String),

    /// A solver hit its iteration or node limit before proving optimality.
    #[error("iteration limit: {0}")]
    IterationLimit(String),

    /// Finite-difference grid too coarse or malformed.
    #[error("grid error: {0}")]
    Grid(String),

    /// No tuning grid point survived its gate.
    #[error("tuning gate empty: {0}")]
    GateEmpty(String),

    /// An engine reached a state that its construction rules out.
    #[error("engine error: {0}")]
    Engine(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
