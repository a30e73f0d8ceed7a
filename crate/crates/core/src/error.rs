use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("linear solver failed after {iterations} iterations (residual {residual:.3e}): {reason}")]
    LinearSolver {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("evaluation point {point} lies {distance:.3e} Å from atom {atom}")]
    Singularity {
        atom: usize,
        point: usize,
        distance: f64,
    },

    #[error("Newton solve failed at solvent node {node}: {reason} (last residual {residual:.3e})")]
    Newton {
        node: usize,
        residual: f64,
        reason: String,
    },

    #[error("domain violation at node {node}: {msg}")]
    Domain { node: usize, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
