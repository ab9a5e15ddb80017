use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Variants map one-to-one onto the error classes reported by the CLI, so the
/// class name (see [`Error::class`]) is stable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("permutation pair is not admissible: {0}")]
    NotAdmissible(String),
    #[error("invalid permutation data: {0}")]
    InvalidPermutation(String),
    #[error("invalid length vector: {0}")]
    InvalidLengths(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("Keane condition violated: {0}")]
    KeaneViolation(String),
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),
    #[error("index out of range: {0}")]
    RangeError(String),
    #[error("matrix is not primitive: {0}")]
    NotPrimitive(String),
    #[error("unsupported function kind: {0}")]
    UnsupportedKind(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("no certified gap: {0}")]
    NoGap(String),
    #[error("quotient operator is numerically singular: {0}")]
    SingularQuotient(String),
    #[error("correction series does not decay: {0}")]
    SeriesDiverging(String),
    #[error("correction term left the mean-zero constants: {0}")]
    NotInGammaStar(String),
    #[error("majorant series is not summable: {0}")]
    NotSummable(String),
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable class name used in reports.
    pub fn class(&self) -> &'static str {
        match self {
            Error::NotAdmissible(_) => "NotAdmissible",
            Error::InvalidPermutation(_) => "InvalidPermutation",
            Error::InvalidLengths(_) => "InvalidLengths",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::KeaneViolation(_) => "KeaneViolation",
            Error::HorizonExceeded(_) => "HorizonExceeded",
            Error::RangeError(_) => "RangeError",
            Error::NotPrimitive(_) => "NotPrimitive",
            Error::UnsupportedKind(_) => "UnsupportedKind",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::NoGap(_) => "NoGap",
            Error::SingularQuotient(_) => "SingularQuotient",
            Error::SeriesDiverging(_) => "SeriesDiverging",
            Error::NotInGammaStar(_) => "NotInGammaStar",
            Error::NotSummable(_) => "NotSummable",
            Error::BoundViolated(_) => "BoundViolated",
            Error::DivisionByZero => "DivisionByZero",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
