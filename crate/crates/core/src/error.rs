use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("value {value} outside 1..={n}")]
    OutOfRange { value: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Exhaustive enumeration refused; `count` saturates at `u128::MAX`.
    #[error("enumeration would produce {count} instances, budget is {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("protocol does not fit instance: {0}")]
    Mismatch(String),

    #[error("player {player} is not deterministic: replay produced a different message")]
    Nondeterministic { player: usize },

    #[error("player {player} sent an unreadable message: {reason}")]
    BadMessage { player: usize, reason: String },

    #[error("player {player} cannot see {what}")]
    NotVisible { player: usize, what: &'static str },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A crossed cell was promised by the counting argument but none exists,
    /// so the caller's message bound must be wrong.
    #[error("no crossed cell: {0}")]
    NoCrossedCell(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
