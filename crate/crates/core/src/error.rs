use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension n = {n} (need n >= {min})")]
    InvalidDimension { n: usize, min: usize },

    #[error("unsupported derivative order {0} (supported: 1, 2)")]
    UnsupportedOrder(u32),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: model has n = {model}, direction has n = {theta}")]
    DimensionMismatch { model: usize, theta: usize },

    #[error("unknown model `{name}`; supported models: {supported}")]
    UnknownModel { name: String, supported: String },

    #[error("dimension n = {n} too large for the dense estimator (max {max}); use the bound Λ <= 4/λ₁ instead")]
    TooLarge { n: usize, max: usize },

    #[error("method not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
