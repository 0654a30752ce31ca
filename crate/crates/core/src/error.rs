use thiserror::Error;

use crate::lattice::LatticePoint;
use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Reads a whole input file, naming it on failure.
pub(crate) fn read_input(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("location {0} lies outside the spec domain")]
    Domain(LatticePoint),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid spec: {0}")]
    Spec(String),

    #[error("spec failed validation: {0}")]
    Validation(ValidationReport),

    #[error("subset enumeration over {size} sites exceeds the cap of {limit}")]
    Capacity { size: usize, limit: usize },

    #[error("degenerate conditioning set: alternating extremal-coefficient sum is {0}")]
    DegenerateConditioning(f64),

    #[error("conditional expectation undefined: {0}")]
    UndefinedConditional(String),

    #[error("spec carries floating-point weights; exact rational evaluation is unavailable")]
    NotExact,

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("unknown station `{0}`")]
    Lookup(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
