use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split roughly into bad input (parse errors, invalid parameters,
/// mismatched axes) and violated internal invariants. The CLI maps the former
/// to exit code 2 and the latter to exit code 3, see [`Error::is_input_error`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("complex not closed: face {face:?} of simplex {simplex:?} is missing")]
    NotClosed { simplex: Vec<u32>, face: Vec<u32> },

    #[error("invalid simplex {simplex:?}: {msg}")]
    InvalidSimplex { simplex: Vec<u32>, msg: String },

    #[error("non-finite value at vertex {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("threshold {0} outside (0, 1]")]
    ThresholdOutOfRange(f64),

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("matrix is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("inadmissible weight on simplex {simplex:?}: expected {expected}, found {found}")]
    Inadmissible {
        simplex: Vec<u32>,
        expected: f64,
        found: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Invariant(_))
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
