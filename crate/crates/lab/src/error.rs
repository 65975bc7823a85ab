use nodal_morse::io::IoError;
use nodal_morse::linkage::LinkageError;
use nodal_morse::morse::MorseError;
use nodal_morse::nodal::NodalError;
use nodal_morse::transversality::TransversalityError;
use nodal_morse::{OperatorError, SpectralError};
use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum LabError {
    /// An input does not meet a hypothesis of the requested computation.
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid arguments: {0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Precondition(_) | LabError::Usage(_) => 2,
            LabError::Io(_) | LabError::Schema(_) => 3,
            LabError::Cap(_) => 4,
        }
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<IoError> for LabError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Read { .. } => LabError::Io(e.to_string()),
            _ => LabError::Schema(e.to_string()),
        }
    }
}

impl From<OperatorError> for LabError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::CapExceeded { .. } => LabError::Cap(e.to_string()),
            _ => LabError::Precondition(e.to_string()),
        }
    }
}

impl From<SpectralError> for LabError {
    fn from(e: SpectralError) -> Self {
        LabError::Precondition(e.to_string())
    }
}

impl From<NodalError> for LabError {
    fn from(e: NodalError) -> Self {
        match e {
            NodalError::Operator(inner) => inner.into(),
            _ => LabError::Precondition(e.to_string()),
        }
    }
}

impl From<MorseError> for LabError {
    fn from(e: MorseError) -> Self {
        match e {
            MorseError::Operator(inner) => inner.into(),
            MorseError::Nodal(inner) => inner.into(),
            _ => LabError::Precondition(e.to_string()),
        }
    }
}

impl From<LinkageError> for LabError {
    fn from(e: LinkageError) -> Self {
        match e {
            LinkageError::Operator(inner) => inner.into(),
            LinkageError::Morse(inner) => inner.into(),
            LinkageError::Nodal(inner) => inner.into(),
            _ => LabError::Precondition(e.to_string()),
        }
    }
}

impl From<TransversalityError> for LabError {
    fn from(e: TransversalityError) -> Self {
        match e {
            TransversalityError::Operator(inner) => inner.into(),
            _ => LabError::Precondition(e.to_string()),
        }
    }
}
