use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the region where a formula or sampler is valid.
    #[error("{name} = {value} is outside the domain: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("usage error: {0}")]
    Usage(String),

    /// A point entered the hull (or the driving gap closed) before the requested step.
    #[error("swallowed at step {step}: {what}")]
    Swallowed { step: usize, what: String },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("point {0} lies on the slit")]
    OnBoundary(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// The experiment ran but its own validity checks failed.
    #[error("experiment invalid: {0}")]
    InvalidExperiment(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            constraint,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
