use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("invalid input: non-finite value {0}")]
    NonFinite(f64),
    #[error("weight {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("degenerate scale: both endpoints equal {0}")]
    DegenerateScale(f64),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("bundle {bundle}: missing mandatory file `{file}`")]
    MissingFile { bundle: PathBuf, file: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("unexpected payload: {0}")]
    Payload(String),
}

impl IngestError {
    pub(crate) fn json(path: impl Into<PathBuf>, err: serde_json::Error) -> Self {
        IngestError::Parse {
            path: path.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("polyline needs at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("snap tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("duplicate segment id `{0}`")]
    DuplicateSegment(String),
    #[error("node {id} has inconsistent coordinates across segments")]
    InconsistentNode { id: u64 },
    #[error("network is empty")]
    EmptyNetwork,
    #[error("no {0} stations available")]
    NoStations(&'static str),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid coordinates ({lat}, {lon})")]
    BadCoordinates { lat: f64, lon: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("network is empty")]
    EmptyNetwork,
    #[error("no route between node {from} and node {to}")]
    NoRoute { from: u64, to: u64 },
    #[error("invalid preference vector: {0}")]
    InvalidPreference(String),
    #[error("no weight vector for segment `{0}`")]
    MissingWeights(String),
    #[error("negative edge cost {cost} on segment `{segment}`")]
    NegativeCost { segment: String, cost: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("configuration error: normalized length mode needs a positive normalizer")]
    MissingNormalizer,
    #[error("segment length must be positive, got {0}")]
    BadLength(f64),
}

/// Errors surfaced by the scenario pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl Error {
    /// Stable process exit code: 2 input/parse, 3 no route, 4 transport.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Route(RouteError::NoRoute { .. }) => 3,
            Error::Ingest(IngestError::Transport(_)) => 4,
            _ => 2,
        }
    }
}
