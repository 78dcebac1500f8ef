use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the probing toolkit.
///
/// IO and file-format failures live in the std companion crate; everything
/// here is a domain or contract violation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector with zero Euclidean norm was used where a direction is needed.
    DegenerateVector,
    /// An operation that needs at least one (or two) items got too few.
    EmptySet(&'static str),
    /// A word could not be resolved in the embedding vocabulary.
    MissingWord(String),
    DuplicateToken(String),
    Dimension { expected: usize, found: usize },
    /// A matrix or vector holds a non-finite value or an empty token.
    InvalidMatrix(String),
    UnknownProperty(String),
    /// Concepts that came out both positive and negative.
    Conflict(Vec<String>),
    InconsistentJudgment(String),
    DegenerateFold(String),
    SingleClass,
    MissingReport(String),
    /// Scenario spec violates its invariants.
    Spec(String),
    /// Statistic undefined for the given input (e.g. constant ranks).
    Undefined(&'static str),
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateVector => write!(f, "degenerate vector: zero norm"),
            Error::EmptySet(what) => write!(f, "empty set: {what}"),
            Error::MissingWord(w) => write!(f, "word not in vocabulary: {w}"),
            Error::DuplicateToken(t) => write!(f, "duplicate token: {t}"),
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidMatrix(msg) => write!(f, "invalid embedding data: {msg}"),
            Error::UnknownProperty(p) => write!(f, "unknown property: {p}"),
            Error::Conflict(words) => {
                write!(f, "conflicting labels (both implied and excluded): ")?;
                for (i, w) in words.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
            Error::InconsistentJudgment(w) => {
                write!(f, "inconsistent crowd judgments for word: {w}")
            }
            Error::DegenerateFold(msg) => write!(f, "degenerate fold: {msg}"),
            Error::SingleClass => write!(f, "training data contains a single class"),
            Error::MissingReport(p) => write!(f, "no report for property: {p}"),
            Error::Spec(msg) => write!(f, "invalid scenario spec: {msg}"),
            Error::Undefined(what) => write!(f, "undefined: {what}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
