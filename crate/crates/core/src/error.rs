use thiserror::Error;

/// Errors raised while loading data, fitting nuisance models or computing
/// estimates.
#[derive(Debug, Error)]
pub enum Error {
    /// A feature map refers to something the data cannot provide.
    #[error("specification error: {0}")]
    Specification(String),

    /// The dataset is structurally inconsistent (ragged covariates, bad time grid, ...).
    #[error("structural error: {0}")]
    Structure(String),

    /// Input file does not follow the panel schema.
    #[error("data error at row {row}, column {column}: {message}")]
    Data {
        row: usize,
        column: String,
        message: String,
    },

    /// A group or propensity needed in a denominator is empty or zero.
    #[error("positivity error: {0}")]
    Positivity(String),

    /// A design matrix or information matrix is not of full rank.
    #[error("singular design: {0}")]
    Singular(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// An argument lies outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
