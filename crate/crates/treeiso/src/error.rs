use thiserror::Error;

/// Syntax error with the byte offset at which it occurred.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: String) -> Self {
        ParseError { offset, message }
    }
}

/// Errors raised by the toolkit's operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("duplicate label '{0}'")]
    DuplicateLabel(String),

    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("substitution does not bind exactly the pattern labels (missing: {missing:?}, extra: {extra:?})")]
    SubstitutionDomain { missing: Vec<String>, extra: Vec<String> },

    #[error("invalid monomial position {0}")]
    InvalidPosition(usize),

    #[error("cannot split the constant term (exponent 0)")]
    SplitConstant,

    #[error("merge requires exponents differing by exactly 2, got {0} and {1}")]
    MergeGap(usize, usize),

    #[error("monomial X^{0} not present")]
    MissingMonomial(usize),

    #[error("1 cannot serve as a catalyst (r must be positive)")]
    ZeroCatalyst,

    #[error("degree reduction requires exponent >= 7, got {0}")]
    DegreeTooLow(usize),

    #[error("invalid derivation at move {index}: {reason}")]
    InvalidDerivation { index: usize, reason: String },

    #[error("development precondition violated: {0}")]
    DevelopPrecondition(String),

    #[error("tuple does not belong to the expected polynomial: {0}")]
    TupleMismatch(String),

    #[error("verification depth {given} too small; need at least {needed}")]
    DepthTooSmall { given: usize, needed: usize },

    #[error("natural-number overflow in {0}")]
    Overflow(&'static str),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
