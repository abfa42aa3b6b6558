use thiserror::Error;

/// Errors produced by model evaluation, sampling, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} must be finite")]
    NonFinite { what: &'static str },

    #[error("magnetization {m} outside [-1, 1]")]
    MagnetizationRange { m: f64 },

    #[error("value {value} is not on the size-{n} spectrum (nearest atoms {below} and {above})")]
    OffSpectrum {
        value: f64,
        n: usize,
        below: f64,
        above: f64,
    },

    #[error("boundary atom m = {m}: bound only defined for |m| < 1")]
    BoundaryAtom { m: f64 },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dataset row {row}: {detail}")]
    DataRow { row: usize, detail: String },

    #[error(
        "fixed-point iteration did not converge after {max_iter} iterations \
         (last iterate {last}, residual {residual})"
    )]
    NonConvergence {
        last: f64,
        residual: f64,
        max_iter: usize,
    },

    #[error("mass matrix is not positive definite even after jitter; increase jitter or chi")]
    SingularMass,

    #[error("grid is empty")]
    EmptyGrid,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid chains: {0}")]
    InvalidChains(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {detail}")]
    Parse { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &std::path::Path, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            detail: detail.into(),
        }
    }
}
