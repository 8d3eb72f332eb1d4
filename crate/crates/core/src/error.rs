use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series `{series}`: non-positive price {price} on {date}")]
    NonPositivePrice {
        series: String,
        date: NaiveDate,
        price: f64,
    },

    #[error("series `{series}`: dates not strictly increasing at {date}")]
    UnorderedDates { series: String, date: NaiveDate },

    #[error("not enough observations: need at least {needed}, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("predictor `{series}` starts on {starts}, after the first target date {first_target}")]
    PredictorStartsLate {
        series: String,
        starts: NaiveDate,
        first_target: NaiveDate,
    },

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("misaligned dates: {0}")]
    Misaligned(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sampler diverged: {0}")]
    Divergence(String),

    #[error("missing state component: {0}")]
    MissingState(String),

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("degenerate comparison: {0}")]
    Degenerate(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}
