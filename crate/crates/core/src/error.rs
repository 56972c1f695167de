use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("cannot read {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("beam index {index} out of range for a codebook of {n_beams} beams")]
    BeamIndex { index: usize, n_beams: usize },

    #[error("sectored codebooks need at least 2 beams, got {0}")]
    TooFewBeams(usize),

    #[error("narrow codebook of {narrow} beams is not a refinement of a {wide}-beam codebook")]
    NotNested { wide: usize, narrow: usize },

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("threshold grid must be strictly ascending")]
    GridNotAscending,

    #[error("coverage curve spans [{curve_lo}, {curve_hi}] but [{lo}, {hi}] was requested")]
    CurveRange {
        curve_lo: f64,
        curve_hi: f64,
        lo: f64,
        hi: f64,
    },

    #[error("association probability of the {0} tier is zero, serving-distance density undefined")]
    UndefinedDensity(&'static str),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn field(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
