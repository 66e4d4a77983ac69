use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} cells, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state value left the finite range the explicit scheme can represent.
    #[error("blow-up at t = {t}: |{quantity}| = {value:e} exceeds {threshold:e}")]
    BlowUp {
        quantity: &'static str,
        t: f64,
        value: f64,
        threshold: f64,
    },

    #[error("cloud coverage target {target} is infeasible: {reason}")]
    InfeasibleCoverage { target: f64, reason: String },

    #[error("jacobian pole: P = -h ({0})")]
    JacobianPole(f64),

    #[error("horizon of {0} steps is too short (need at least {1})")]
    HorizonTooShort(usize, usize),

    #[error("empty sample sequence")]
    EmptySamples,

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid config value for `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code category used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::ConfigValue { .. } | Error::InvalidArgument(_) => 2,
            Error::InvalidGrid(_) | Error::ShapeMismatch { .. } => 2,
            Error::Snapshot(_) | Error::Io { .. } => 3,
            Error::BlowUp { .. } => 4,
            _ => 5,
        }
    }
}
