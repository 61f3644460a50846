use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every domain error the library can report.
///
/// The CLI prints [`Error::name`] alongside the message so that scripts can
/// match on a stable identifier.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("corpus contains no tokens")]
    EmptyCorpus,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} gold labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("training data has fewer than two distinct labels")]
    DegenerateLabels,

    #[error("non-finite value from objective: {0}")]
    NumericalFailure(String),

    #[error("line search found no step satisfying the Wolfe conditions")]
    LineSearchFailure,

    #[error("{0} does not produce class scores")]
    Unsupported(&'static str),

    #[error("class {0:?} has fewer than two documents")]
    ClassTooSmall(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("agreement table is empty")]
    EmptyTable,

    #[error("score table is missing cell {model}/{classifier}/{column}")]
    MissingCell {
        model: String,
        classifier: String,
        column: String,
    },

    #[error("score {value} for {key} is outside [0, 1]")]
    Range { key: String, value: f64 },

    #[error("selection rule does not assign classifier {0}")]
    IncompleteRule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("run {run}: {source}")]
    Run {
        run: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable identifier of the error kind.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IoError",
            Error::Parse { .. } => "ParseError",
            Error::DuplicateId(_) => "DuplicateId",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DegenerateLabels => "DegenerateLabels",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::LineSearchFailure => "LineSearchFailure",
            Error::Unsupported(_) => "Unsupported",
            Error::ClassTooSmall(_) => "ClassTooSmall",
            Error::EmptySample => "EmptySample",
            Error::EmptyTable => "EmptyTable",
            Error::MissingCell { .. } => "MissingCell",
            Error::Range { .. } => "RangeError",
            Error::IncompleteRule(_) => "IncompleteRule",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Run { source, .. } => source.name(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
