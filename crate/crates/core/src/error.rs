use std::path::PathBuf;

use crate::network::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(ValidationReport),

    #[error("dimension mismatch in block {block}: expected {expected}, got {got}")]
    DimensionMismatch {
        block: &'static str,
        expected: String,
        got: String,
    },

    #[error("time {s} outside [0, {horizon}]")]
    TimeOutOfRange { s: f64, horizon: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("overflow evaluating {what} (exponent {exponent})")]
    Overflow { what: &'static str, exponent: f64 },

    #[error("degenerate multiplier: lambda({s}) = {value}")]
    DegenerateMultiplier { s: f64, value: f64 },

    #[error("degenerate cubic: leading coefficient {leading} (use the lower-degree fallback)")]
    DegenerateCubic { leading: f64 },

    #[error("no real root satisfies stationarity: best residual {best_residual:e} over roots {roots:?}")]
    StationarityFailure { best_residual: f64, roots: Vec<f64> },

    #[error("fixed-point iteration stalled after {iterations} iterations (last change {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        profile: Vec<f64>,
    },

    #[error("non-finite state for agent {agent} at step {step}")]
    Divergence { step: usize, agent: usize },

    #[error("matrix exponential failed: {0}")]
    MatrixExponential(String),

    #[error("singular curvature: |f_xx| = {0:e}")]
    SingularCurvature(f64),

    #[error("field does not decay at the grid boundary (|value| = {0:e}); the transform would alias")]
    Aliasing(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
