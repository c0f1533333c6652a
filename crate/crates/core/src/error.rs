use thiserror::Error;

/// Errors surfaced by the library. Config-shaped problems (`InvalidKernel`,
/// `ModeMismatch`, `GridMismatch`, `InvalidConfig`, `UnknownKey`) are
/// distinguished from runtime numerical failures so the CLI can map them to
/// different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("grid/field mismatch: {0}")]
    GridMismatch(String),

    #[error("domain has no included nodes")]
    EmptyDomain,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("time step {dt} exceeds stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("contraction certificate failed (cond1 margin {cond1}, cond2 margin {cond2}); pass the override to iterate anyway")]
    CertificateNegative { cond1: f64, cond2: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad inputs/configuration rather than a
    /// numerical breakdown at runtime.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidKernel(_)
                | Error::ModeMismatch(_)
                | Error::GridMismatch(_)
                | Error::EmptyDomain
                | Error::InvalidConfig(_)
                | Error::UnknownKey(_)
                | Error::StepTooLarge { .. }
                | Error::CertificateNegative { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
