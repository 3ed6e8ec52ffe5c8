use thiserror::Error;

use crate::convex::SolveStatus;

pub type Result<T> = std::result::Result<T, IsacError>;

#[derive(Debug, Error)]
pub enum IsacError {
    #[error("angle {0} rad lies outside [-pi/2, pi/2]")]
    AngleOutOfRange(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("degenerate desired beampattern (all zero)")]
    DegenerateBeampattern,

    #[error("empty target list")]
    NoTargets,

    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("no waveform supplied: need a transmit vector or a covariance")]
    MissingWaveform,

    #[error("utopia value {name} = {value} is not a valid normalizer")]
    InvalidUtopia { name: &'static str, value: f64 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("convex solve ended with status {status:?}: {detail}")]
    Solver { status: SolveStatus, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed convex problem: {0}")]
    MalformedProblem(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl IsacError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        IsacError::Io { path: path.as_ref().display().to_string(), source }
    }
}
