use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("codebook of {requested} codewords exceeds the budget of {budget}")]
    Budget { requested: u128, budget: u64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("geometric degeneracy: {0}")]
    Degenerate(String),

    #[error("infeasible strategy: {0}")]
    Infeasible(String),

    #[error("index out of range: {what} = {index} (limit {limit})")]
    OutOfRange { what: &'static str, index: usize, limit: usize },

    #[error("covering construction exceeded {0} centers")]
    CoveringBudget(usize),

    #[error("malformed codebook container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
