use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EmptySample: no observations")]
    EmptySample,

    #[error("SampleTooSmall: need at least {min} observations, got {n}")]
    SampleTooSmall { n: usize, min: usize },

    #[error("NonFinite: observation {index} is {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("DegenerateScale: IQR and MAD are both zero")]
    DegenerateScale,

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("ColumnNotFound: {0}")]
    ColumnNotFound(String),

    #[error("ParseError at row {row}: {content:?}")]
    Parse { row: usize, content: String },

    #[error("RenderError: {0}")]
    Render(String),

    #[error("{method}: {source}")]
    Analysis {
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// The innermost error, skipping method/replicate context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Analysis { source, .. } | Error::Replicate { source, .. } => source.root(),
            other => other,
        }
    }
}
