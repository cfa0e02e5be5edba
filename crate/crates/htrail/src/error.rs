use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{origin}: unsupported format {found:?}, expected {expected}")]
    Version { origin: String, found: String, expected: &'static str },
    #[error("{origin}:{line}: {reason}")]
    Malformed { origin: String, line: usize, reason: String },
    #[error("{origin}:{line}: missing field {field}")]
    MissingField { origin: String, line: usize, field: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] htrail_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Process exit code: 2 usage, 3 data, 4 numerical failure.
    pub fn exit_code(&self) -> u8 {
        fn numeric(e: &htrail_core::Error) -> bool {
            match e {
                htrail_core::Error::NonFinite(_) => true,
                htrail_core::Error::Fold { source, .. } => numeric(source),
                _ => false,
            }
        }
        match self {
            Error::Usage(_) => 2,
            Error::Core(e) if numeric(e) => 4,
            Error::Core(htrail_core::Error::InvalidConfig(_)) => 2,
            _ => 3,
        }
    }
}
