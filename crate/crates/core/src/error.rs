use std::path::PathBuf;

/// Errors produced by the detector, generators and evaluation code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {field}: {reason}")]
    Format { field: &'static str, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },

    #[error("point ({x}, {y}) maps to infinity")]
    PointAtInfinity { x: f64, y: f64 },

    #[error("homography is singular")]
    SingularHomography,

    #[error("inlier ratio is undefined for an empty match set")]
    EmptyMatches,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Param {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user-supplied values rather than I/O or file contents.
    pub fn is_parameter_error(&self) -> bool {
        matches!(
            self,
            Error::Param { .. }
                | Error::PointAtInfinity { .. }
                | Error::SingularHomography
                | Error::EmptyMatches
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
