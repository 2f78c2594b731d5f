use thiserror::Error;

use crate::dist::Violation;

/// Errors produced by `hellinger-core`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(#[from] Violation),

    #[error("supports do not match: {0}")]
    SupportMismatch(String),

    #[error("supports cannot be placed on a common grid: {0}")]
    Incommensurable(String),

    #[error("mixture weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("sample index {index} is outside a support of {len} atoms")]
    AtomOutOfRange { index: usize, len: usize },

    #[error("geodesic is degenerate: the endpoints coincide")]
    DegenerateGeodesic,

    #[error("angle {phi} is outside [0, {theta}]")]
    AngleOutOfRange { phi: f64, theta: f64 },

    #[error("supports overlap at atom {0}; the disjoint-support test needs disjoint supports")]
    OverlappingSupports(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("no trials requested")]
    NoTrials,

    #[error("sample-count grid is empty")]
    EmptyGrid,

    #[error("every truth distribution is classified as neither hypothesis")]
    NoClassifiableTruth,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("malformed JSON at `{path}`: {message}")]
    Json { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

/// Parse JSON while keeping track of the field path, so diagnostics name the
/// offending field.
pub(crate) fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        Error::Json {
            path,
            message: err.into_inner().to_string(),
        }
    })
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
