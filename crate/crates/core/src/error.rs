use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The enumeration an operation needs is larger than the configured cap.
    #[error("enumeration needs {required} oracle evaluations, budget is {limit}")]
    BudgetExceeded { required: u128, limit: u128 },

    /// Every candidate ratio had a zero denominator.
    #[error("degenerate oracle: every {quantity} candidate has a zero denominator")]
    Degenerate { quantity: &'static str },

    #[error("string of length {len} exceeds the oracle's probe depth {max}")]
    DepthExceeded { len: usize, max: usize },

    #[error("action {id} is out of range for an action set of size {num_actions}")]
    InvalidAction { id: usize, num_actions: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    /// The backward-induction permutation could not place an element at `stage`.
    #[error("no placeable element at stage {stage}; the structure violates the matroid axioms")]
    ConstructionFailure { stage: usize },

    #[error("transition probabilities are neither non-increasing nor non-decreasing over stages")]
    NotMonotone,

    #[error("action grid has no e = {0} point")]
    MissingGridPoint(f64),

    #[error("malformed string literal {0:?}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }
}
