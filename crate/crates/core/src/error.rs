use std::path::PathBuf;

/// Errors produced by the tracking engine and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("descriptor has (near) zero norm")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("innovation covariance is numerically singular")]
    SingularInnovation,

    #[error("appearance gallery is empty")]
    EmptyGallery,

    #[error("detection {index} has no appearance descriptor")]
    MissingDescriptor { index: usize },

    #[error("track {track_id}: {source}")]
    Track {
        track_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid layer spec: {0}")]
    InvalidSpec(String),

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("feature rows ({features}) do not match detection lines ({detections})")]
    RowCountMismatch { detections: usize, features: usize },

    #[error("malformed feature container: {0}")]
    FeatureFormat(String),

    #[error("frame {frame} is not after previous frame {previous}")]
    FrameOrder { frame: u32, previous: u32 },

    #[error("ground truth contains no boxes")]
    EmptyGroundTruth,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn for_track(track_id: u64, source: Error) -> Self {
        Error::Track {
            track_id,
            source: Box::new(source),
        }
    }

    /// True for I/O failures; everything else is a validation or data error.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Track { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
