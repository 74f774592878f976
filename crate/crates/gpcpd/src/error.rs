//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The jitter ladder was exhausted without producing a valid Cholesky factor.
    #[error("matrix is not positive definite (largest jitter tried: {max_jitter:e})")]
    NotPositiveDefinite { max_jitter: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The eigenvalue iteration hit its sweep cap without isolating every eigenvalue.
    #[error("symmetric eigendecomposition did not converge within {0} sweeps")]
    ConvergenceFailure(usize),

    #[error("candidate index {t} outside valid range ({lo}, {hi}]")]
    CandidateOutOfRange { t: usize, lo: usize, hi: usize },

    /// The quadratic equation for the covariance scale has no positive root.
    #[error("no positive root for the scale estimate at candidate {t}")]
    NoPositiveRoot { t: usize },

    #[error("misaligned traces: {0}")]
    Misalignment(String),

    #[error("paired comparison needs at least 2 runs, got {0}")]
    InsufficientRuns(usize),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }
}
