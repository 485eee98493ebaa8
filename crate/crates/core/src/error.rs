use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed CSV input. `row` is the 1-based data record (header excluded);
    /// 0 refers to the header or the input as a whole.
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    /// A cell that cannot be encoded. `row` is the 1-based data record.
    #[error("data error at row {row}, column `{column}`: {message}")]
    Data {
        row: usize,
        column: String,
        message: String,
    },

    #[error("estimation error: category {category} (`{label}`) does not occur in the data")]
    MissingCategory { category: usize, label: String },

    #[error(
        "perfect separation: coefficient `{name}` reached {value:.3} while the log-likelihood kept improving"
    )]
    Separation { name: String, value: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    /// Wrong kind of covariate for the requested effect.
    #[error("covariate kind error: {0}")]
    Kind(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("numerical error: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
