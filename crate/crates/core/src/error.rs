use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library reports. Variants map onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error("lorentzian fit did not converge after {iterations} iterations (best so far: center={center}, q={q}, amplitude={amplitude})")]
    Fit {
        iterations: usize,
        center: f64,
        q: f64,
        amplitude: f64,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: 2 for bad input, 3 for numerical trouble, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Usage(_) => 2,
            Error::Convergence(_) | Error::Fit { .. } => 3,
            Error::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
