use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// The aircraft is so close to the reference point that path angles are meaningless.
    #[error("path angles undefined: position is {distance:.3} m from the vertical reference point")]
    UndefinedAngle { distance: f64 },

    #[error("gimbal lock: pitch {pitch:.4} deg is within 0.1 deg of +/-90")]
    GimbalLock { pitch: f64 },

    #[error("projection singular: point depth {depth:e} m")]
    ProjectionSingular { depth: f64 },

    #[error("pixel ray does not intersect the ground plane")]
    NoIntersection,

    #[error("parse error{}: {message}", location.map(|(l, c)| format!(" at line {l}, column {c}")).unwrap_or_default())]
    Parse {
        message: String,
        location: Option<(usize, usize)>,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("average precision undefined: no ground truth boxes")]
    NoGroundTruth,

    #[error("extended pool of {size} boxes exceeds the exhaustive search limit of {limit}")]
    ExhaustiveLimit { size: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse {
            message: msg.into(),
            location: None,
        }
    }

    /// True for errors caused by the file system rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            return Error::Io(std::io::Error::other(e));
        }
        Error::Parse {
            message: e.to_string(),
            location: Some((e.line(), e.column())),
        }
    }
}

impl From<serde_yaml::Error> for Error {
    fn from(e: serde_yaml::Error) -> Self {
        Error::Parse {
            location: e.location().map(|l| (l.line(), l.column())),
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!(),
            }
        } else {
            let line = e.position().map(|p| (p.line() as usize, 1));
            Error::Parse {
                message: e.to_string(),
                location: line,
            }
        }
    }
}
