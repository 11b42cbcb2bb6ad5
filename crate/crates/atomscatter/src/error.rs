use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its domain.
    #[error("parameter `{name}` out of domain: {reason}")]
    Domain { name: &'static str, reason: String },

    #[error("normalization impossible: {0}")]
    Normalization(String),

    #[error("histograms have mismatched binning: {0}")]
    BinningMismatch(String),

    #[error("empty window [{t_min:e}, {t_max:e}] s: {reason}")]
    EmptyWindow {
        t_min: f64,
        t_max: f64,
        reason: String,
    },

    /// Least-squares fit did not converge; carries the last iterate (gammap, amplitude).
    #[error("fit failed after {iterations} iterations (last gammap = {gammap:e} rad/s, amplitude = {amplitude}): {reason}")]
    FitFailed {
        iterations: usize,
        gammap: f64,
        amplitude: f64,
        reason: String,
    },

    /// Config document violated the schema; `pointer` is a JSON pointer to the field.
    #[error("config error at `{pointer}`: {reason}")]
    Config { pointer: String, reason: String },

    #[error("malformed histogram file {path}: line {line}: {reason}")]
    HistogramFormat {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code class for this error.
    ///
    /// `2` config/parameter errors, `3` I/O, `4` fit failures, `5` data errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::Config { .. } => 2,
            Error::Io { .. } | Error::Json(_) => 3,
            Error::FitFailed { .. } => 4,
            Error::Normalization(_)
            | Error::BinningMismatch(_)
            | Error::EmptyWindow { .. }
            | Error::HistogramFormat { .. } => 5,
        }
    }
}
