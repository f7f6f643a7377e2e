use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unsupported representation: {0}")]
    Unsupported(String),

    #[error("rank-deficient input: {0}")]
    RankDeficient(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature failed to reach tolerance (achieved error {achieved:e}, value {value:e})")]
    Quadrature { value: f64, achieved: f64 },

    #[error("walk exceeded {steps} steps; shell width {shell:e} is probably too small")]
    StuckWalk { steps: u64, shell: f64 },

    #[error("degenerate estimate: {0}")]
    DegenerateEstimate(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    /// True for failures that originate in a numerical backend rather than in
    /// the caller's input.
    pub fn is_estimator_failure(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::StuckWalk { .. }
                | Error::DegenerateEstimate(_)
                | Error::Consistency(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

pub(crate) fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(msg.into()))
}
