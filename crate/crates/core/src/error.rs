use std::path::PathBuf;

/// Errors raised anywhere in the regionalization pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry error in unit `{unit}`: {reason}")]
    Geometry { unit: String, reason: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate graph: total weight is zero")]
    DegenerateGraph,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ingestion error in `{path}`: {reason}")]
    Ingest { path: PathBuf, reason: String },

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn geometry(unit: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Geometry {
            unit: unit.into(),
            reason: reason.into(),
        }
    }

    pub fn with_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Geometry { .. } => "geometry",
            Error::Consistency(_) => "consistency",
            Error::Config(_) => "config",
            Error::DegenerateGraph => "degenerate_graph",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Ingest { .. } => "ingest",
            Error::Io { .. } => "io",
            Error::Context { source, .. } => source.kind(),
        }
    }

    /// The file path involved, if any.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Error::Ingest { path, .. } | Error::Io { path, .. } => Some(path),
            Error::Context { source, .. } => source.path(),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
