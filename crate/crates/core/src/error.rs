use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the scenario builders, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("malformed config at `{field}`: {reason}")]
    ConfigParse { field: String, reason: String },

    #[error("matrix `{name}` is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { name: &'static str, asymmetry: f64 },

    #[error("matrix `{name}` is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { name: &'static str, min_eig: f64 },

    #[error("operator not positive definite")]
    NotPositiveDefinite,

    #[error("zero waveform: the unit-response constraint cannot be met")]
    DegenerateWaveform,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("no feasible rank-one candidate")]
    NoFeasibleCandidate,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
