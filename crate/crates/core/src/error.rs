use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet must contain at least one label")]
    EmptyAlphabet,
    #[error("duplicate label `{0}` in alphabet")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("expected {expected} probabilities, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },
    #[error("non-finite probability at index {0}")]
    NonFiniteProbability(usize),
    #[error("probabilities sum to {0}, which is not within tolerance of 1")]
    NotNormalized(f64),
    #[error("invalid axis index {0}")]
    InvalidAxis(usize),
    #[error("joint distributions support 2 or 3 axes, got {0}")]
    UnsupportedArity(usize),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("channel row for input `{0}` is undefined but the input has positive probability")]
    MissingRow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("differential privacy requires a nonempty adjacency relation")]
    EmptyAdjacency,
    #[error("joint distribution has empty support")]
    EmptySupport,
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("brute-force oracle limited to {limit} channel parameters, scenario has {count}")]
    TooManyParameters { count: usize, limit: usize },
    #[error("brute-force grid would visit {0} points; use a coarser resolution")]
    GridTooLarge(u128),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
