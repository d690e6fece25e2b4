use thiserror::Error;

/// Errors raised by the bound evaluators, samplers and the CLI front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `det σ = 1`: the Gaussian QFI system `σ⊗σ − Ω⊗Ω` is singular.
    #[error("pure-state singular: det(sigma) = {det} is 1 within tolerance")]
    PureStateSingular { det: f64 },

    #[error("ill-conditioned linear system (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// Pure input (T = 1) with no diffusion: the QFI is formally divergent.
    #[error("degenerate pure state: T = 1 with zero diffusion has a divergent quantum Fisher information")]
    DegeneratePureState,

    /// The measured statistics do not depend on the diffusion rate (e.g. tau = 0).
    #[error("uninformative measurement: outcome statistics carry no dependence on the diffusion rate")]
    Uninformative,

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("non-identifiable: {0}")]
    NonIdentifiable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that mark a singular corner of parameter space rather
    /// than a malformed request.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::PureStateSingular { .. }
                | Error::IllConditioned { .. }
                | Error::DegeneratePureState
                | Error::Uninformative
                | Error::SingularCovariance(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(msg()))
    }
}
