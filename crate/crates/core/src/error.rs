use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped loosely by the stage that raises them; the CLI maps
/// them onto exit codes through [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // data model
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("matrix too small: {rows} rows x {cols} columns (need at least 2 rows and 1 column)")]
    TooSmall { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    // subset design
    #[error("q must be coprime with p (p = {p}, q = {q}, gcd = {gcd})")]
    NotCoprime { p: usize, q: usize, gcd: usize },
    #[error("bad subset cardinality: {0}")]
    BadCardinality(String),
    #[error("d = {d} is smaller than p = {p}")]
    DTooSmall { p: usize, d: usize },
    #[error("p = {p} exceeds the exact-rank bound {bound}")]
    TooLarge { p: usize, bound: usize },

    // tests
    #[error("degenerate variance{}", fmt_index(.index))]
    DegenerateVariance { index: Option<usize> },
    #[error("no bootstrap draws")]
    EmptyDraws,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // simulation
    #[error("theta out of (0,1) at column {index}: {value}")]
    BadTheta { index: usize, value: f64 },
    #[error("deviating profile does not fit: p0 = {p0}, p = {p}")]
    ProfileOverflow { p: usize, p0: usize },
    #[error("value {0} outside the domain [0, 1]")]
    OutOfRange(f64),
    #[error("covariance matrix is not positive semi-definite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },

    // risk models
    #[error("optimizer did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("series has zero variance")]
    DegenerateSeries,
    #[error("bad distribution parameters: {0}")]
    BadParams(String),
    #[error("too few observations: need {needed}, have {have}")]
    TooFewObservations { needed: usize, have: usize },
    #[error("too few exceedances: k = {k}, sample size {m}")]
    TooFewExceedances { k: usize, m: usize },
    #[error("GPD fit failed: {0}")]
    GpdNonConvergence(String),
    #[error("insufficient history: need {needed}, have {have}")]
    InsufficientHistory { needed: usize, have: usize },

    // backtest
    #[error("tail threshold u = {0} must lie in (0, 0.5) with n*u >= 1")]
    BadThreshold(f64),

    // serialization
    #[error("serialization error: {0}")]
    Serde(String),
}

fn fmt_index(index: &Option<usize>) -> String {
    match index {
        Some(i) => format!(" in component {i}"),
        None => String::new(),
    }
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Degenerate,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            NotCoprime { .. }
            | BadCardinality(_)
            | DTooSmall { .. }
            | TooLarge { .. }
            | InvalidArgument(_)
            | BadTheta { .. }
            | ProfileOverflow { .. }
            | OutOfRange(_)
            | BadParams(_)
            | BadThreshold(_) => ErrorClass::Usage,
            NonFinite { .. }
            | TooSmall { .. }
            | DimensionMismatch(_)
            | ShapeMismatch { .. }
            | NotPsd { .. }
            | TooFewObservations { .. }
            | TooFewExceedances { .. }
            | InsufficientHistory { .. }
            | Serde(_) => ErrorClass::Data,
            DegenerateVariance { .. }
            | EmptyDraws
            | NonConvergence { .. }
            | DegenerateSeries
            | GpdNonConvergence(_) => ErrorClass::Degenerate,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
