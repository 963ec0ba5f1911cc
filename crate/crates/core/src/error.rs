use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("precoder projection infeasible: residual spans all {chains} TX chains")]
    Infeasible { chains: usize },

    #[error("least-squares regressor is rank deficient (rank {rank} of {columns})")]
    RankDeficient { rank: usize, columns: usize },

    #[error("no signal present in snapshots")]
    NoSignal,

    #[error("beam index {index} out of range for codebook of size {size}")]
    BeamIndex { index: usize, size: usize },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
