use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or procedure was configured with an out-of-range value.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data violates a precondition (empty, non-finite, wrong shape).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("bootstrap replicate {index} failed: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("design matrix is rank deficient: column `{column}` is linearly dependent on earlier columns")]
    Singular { column: String },

    #[error("logistic regression did not converge after {iterations} iterations (score norm trace: {trace:?})")]
    NonConvergence { iterations: usize, trace: Vec<f64> },

    #[error("stratification failed: {0}")]
    Stratification(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid model formula: {0}")]
    ModelSpec(String),

    #[error("{failed} of {total} bootstrap refits failed")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
