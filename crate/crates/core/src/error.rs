use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate system: {detail}")]
    DegenerateSystem {
        detail: String,
        /// Offending pair of input directions, when the failure is pairwise.
        pair: Option<(usize, usize)>,
    },

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("tangential intersection at omega={omega:?}, p={p}: |<omega, gamma'>| = {slope:e}")]
    Tangency { omega: Vec<f64>, p: f64, slope: f64 },

    #[error("insufficient curve coverage: {}", .planes.join("; "))]
    Coverage { planes: Vec<String> },

    #[error("unsupported dimension n={0}: only odd dimensions are supported")]
    UnsupportedDimension(usize),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error(
        "three-circles guard violated: need R > sqrt(3)*r, got R={radius} <= sqrt(3)*{support_radius} = {bound}"
    )]
    CurveGuard {
        radius: f64,
        support_radius: f64,
        bound: f64,
    },

    #[error("file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(detail: impl Into<String>) -> Self {
        Error::DegenerateSystem {
            detail: detail.into(),
            pair: None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
