use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants map onto stable string codes (see [`Error::code`]) which the CLI
/// surfaces in its machine-readable error output.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sample coordinate ({x}, {y})")]
    InvalidCoordinate { x: f64, y: f64 },

    #[error("image has zero extent")]
    EmptyImage,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("need at least 4 point correspondences, got {found}")]
    InsufficientPoints { found: usize },

    #[error("degenerate point configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("transform is singular")]
    SingularTransform,

    #[error("pose has no keypoints above the confidence floor")]
    EmptyPose,

    #[error("loss weight must be non-negative, got {0}")]
    InvalidWeight(f64),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidCoordinate { .. } => "InvalidCoordinate",
            Error::EmptyImage => "EmptyImage",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::InvalidValue(_) => "InvalidValue",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::DegenerateConfiguration(_) => "DegenerateConfiguration",
            Error::SingularTransform => "SingularTransform",
            Error::EmptyPose => "EmptyPose",
            Error::InvalidWeight(_) => "InvalidWeight",
            Error::Format(_) => "Format",
            Error::Io { .. } => "Io",
        }
    }

    /// True for failures of the environment rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
