use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("result overflows f64: {0}")]
    Overflow(String),

    #[error("{what} did not converge (last estimate {estimate:e})")]
    NonConvergence { what: String, estimate: f64 },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("spectral matrix singular at omega = {omega}: minimum eigenvalue {min_eig:e}")]
    Singular { omega: f64, min_eig: f64 },

    #[error("block sequence lost positive definiteness at Levinson step {step}")]
    NotPositiveDefinite { step: usize },

    #[error("matrix not positive definite: {0}")]
    NotPd(String),

    #[error("non-finite value at coordinate {coordinate}")]
    NonFinite { coordinate: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Broad class used by front ends to choose exit codes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_) | Error::Param(_) | Error::Unsupported(_) | Error::Parse(_) => {
                ErrorKind::Config
            }
            Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Data(_) => ErrorKind::Io,
            _ => ErrorKind::Numeric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Io,
    Numeric,
}

pub type Result<T> = std::result::Result<T, Error>;
