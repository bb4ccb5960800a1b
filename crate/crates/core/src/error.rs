use thiserror::Error;

/// Errors raised by the laboratory. The variants are grouped so that callers
/// (the scenario runner in particular) can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("coercivity failure: {0}")]
    Coercivity(String),

    #[error("sectoriality failure: {0}")]
    Sectoriality(String),

    #[error("point {point} lies in the spectrum: {detail}")]
    InSpectrum { point: String, detail: String },

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("internal check failed: {0}")]
    Internal(String),

    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by parameters that violate a module's
    /// hypotheses, as opposed to failures of the numerics themselves.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::Precondition(_)
                | Error::Coercivity(_)
                | Error::Sectoriality(_)
                | Error::InSpectrum { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
