use thiserror::Error;

use crate::rings::RingError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("group descriptors differ: {0} vs {1}")]
    DescriptorMismatch(String, String),
    #[error("invalid group descriptor: {0}")]
    InvalidGroup(String),
    #[error("level {level} exceeds truncation {truncation}")]
    LevelTooLarge { level: u32, truncation: u32 },
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("element has depth {depth}, below the required {required}")]
    NotDeepEnough { depth: u32, required: u32 },
    #[error("truncation too shallow: {0}")]
    TruncationTooShallow(String),
    #[error("Lie algebras differ: {0} vs {1}")]
    AlgebraMismatch(String, String),
    #[error("unsupported characteristic: {0}")]
    UnsupportedCharacteristic(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("residual has depth {depth}, expected at least {required}")]
    DepthViolation { depth: u32, required: u32 },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("level pair (n={n}, m={m}) rejected: {reason}")]
    BadLevelPair { n: u32, m: u32, reason: String },
    #[error("generators reach {reached} of {order} elements")]
    NotGenerating { reached: u128, order: u128 },
    #[error("oracle rejects level pair (n={n}, m={m})")]
    OracleLevelRejected { n: u32, m: u32 },
    #[error("precision {precision} exceeds truncation {truncation}")]
    PrecisionExceedsTruncation { precision: u32, truncation: u32 },
    #[error("generating set is not closed under inverses")]
    NotSymmetricSet,
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("cannot decode: {0}")]
    Decode(String),
}

impl Error {
    /// Process exit code: 1 domain error, 2 usage, 3 budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded(_) => 3,
            Error::UnknownSuite(_) | Error::Decode(_) | Error::InvalidGroup(_) => 2,
            Error::Ring(RingError::InvalidDescriptor(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
