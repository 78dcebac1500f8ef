use std::fmt;
use std::io;
use std::path::PathBuf;

/// A file did not match its declared format. Carries the 1-based line for
/// line-oriented formats and the byte offset for binary payloads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub source_name: String,
    pub line: Option<usize>,
    pub offset: Option<u64>,
    pub message: String,
}

impl FormatError {
    pub fn at_line(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        FormatError {
            source_name: source_name.to_owned(),
            line: Some(line),
            offset: None,
            message: message.into(),
        }
    }

    pub fn at_offset(source_name: &str, offset: u64, message: impl Into<String>) -> Self {
        FormatError {
            source_name: source_name.to_owned(),
            line: None,
            offset: Some(offset),
            message: message.into(),
        }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.source_name)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        if let Some(offset) = self.offset {
            write!(f, " (byte {offset})")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for FormatError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] propprobe_core::Error),
    #[error("format error: {0}")]
    Format(#[from] FormatError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("embedding file not found: {}", .0.display())]
    MissingEmbeddings(PathBuf),
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MissingEmbeddings(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
