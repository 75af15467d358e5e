use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. Each variant belongs to exactly one
/// category, and each category has its own process exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("singular walk weight: n² - j² + z vanishes at vertex j = {vertex} (n = {n})")]
    SingularWeight { n: u32, vertex: i64 },

    #[error("certification unavailable: {0}")]
    CertificationUnavailable(String),

    #[error("prediction unavailable: {0}")]
    PredictionUnavailable(String),

    #[error("degenerate leading term: {0}")]
    DegenerateLeadingTerm(String),

    #[error("localization violation: disc n² + D for n = {n} contains {count} eigenvalues, expected 2")]
    LocalizationViolation { n: u32, count: usize },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("eigensolver failure: {0}")]
    Solver(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse error category; the CLI maps these one-to-one onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Argument,
    SingularWeight,
    Certification,
    Spectral,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Io => 1,
            ErrorCategory::Argument => 2,
            ErrorCategory::SingularWeight => 3,
            ErrorCategory::Certification => 4,
            ErrorCategory::Spectral => 5,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Parse(_) | Error::InvalidArgument(_) | Error::Unsupported(_) => {
                ErrorCategory::Argument
            }
            Error::SingularWeight { .. } => ErrorCategory::SingularWeight,
            Error::CertificationUnavailable(_)
            | Error::PredictionUnavailable(_)
            | Error::DegenerateLeadingTerm(_) => ErrorCategory::Certification,
            Error::LocalizationViolation { .. } | Error::Truncation(_) | Error::Solver(_) => {
                ErrorCategory::Spectral
            }
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => ErrorCategory::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category().exit_code()
    }
}
