use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclic mapping must have at least one element")]
    EmptyMapping,
    #[error("cyclic array rows have unequal lengths ({expected} vs {found})")]
    RaggedArray { expected: usize, found: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("coordinate {0} is not on the grid")]
    NotOnGrid(i64),
    #[error("unknown layer '{0}'")]
    UnknownLayer(String),
    #[error("infeasible grid spec: {0}")]
    InfeasibleSpec(String),

    #[error("failed to parse document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid value for {field}: {message}")]
    Validation { field: String, message: String },
    #[error("unknown template '{0}'")]
    UnknownTemplate(String),
    #[error("unknown via '{0}'")]
    UnknownVia(String),
    #[error("unknown grid '{0}'")]
    UnknownGrid(String),

    #[error("bad parameter '{field}': {message}")]
    BadParams { field: String, message: String },
    #[error("unknown pin '{0}'")]
    UnknownPin(String),

    #[error("route is not rectilinear between {from} and {to}")]
    NonRectilinear { from: String, to: String },
    #[error("route needs at least two distinct waypoints")]
    TooFewWaypoints,
    #[error("no via between track ({x}, {y}) layers")]
    MissingVia { x: i64, y: i64 },
    #[error("unknown wire {0}")]
    UnknownWire(usize),
    #[error("pin '{0}' already exists on a different net")]
    DuplicatePin(String),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("design has no placement grid")]
    NoPlacementGrid,

    #[error("layer '{0}' has no cut rule")]
    NoCutRule(String),
    #[error("layer '{0}' is not colorable")]
    NotColorable(String),
    #[error("technology has no dummy template")]
    NoDummyTemplate,

    #[error("coordinate {0} does not fit in 32 bits")]
    Overflow(i64),
    #[error("malformed GDS stream: {0}")]
    Gds(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn bad_param(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::BadParams {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Innermost error, skipping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
