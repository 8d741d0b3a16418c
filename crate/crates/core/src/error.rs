use std::path::PathBuf;

use thiserror::Error;

use crate::mu::simplex::LpStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("data appears linearly separable at lambda = 0: no finite minimizer ({0})")]
    Separable(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("linear program failed: {0:?}")]
    Lp(LpStatus),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
