use thiserror::Error;

/// Errors raised by the numerical kernels of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("level splitting must be strictly positive, got {0}")]
    NonPositiveOmega(f64),

    #[error("coupling f(x) is not finite at x = {x} (value {value})")]
    NonFiniteCoupling { x: f64, value: f64 },

    #[error("qubit state is not normalized: |c_e|^2 + |c_g|^2 = {0}")]
    UnnormalizedState(f64),

    #[error("particle ensemble is empty")]
    EmptyEnsemble,

    #[error("quadrature did not converge: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("band condition violated: {0}")]
    BandConditionViolated(String),

    #[error("grid [{x_min}, {x_max}] does not cover the required interval [{lo}, {hi}]")]
    GridTooNarrow {
        x_min: f64,
        x_max: f64,
        lo: f64,
        hi: f64,
    },

    #[error("peaks are not resolved: {0}")]
    UnresolvedPeaks(String),

    #[error("damping rate is zero, the packet width has no finite limit")]
    ZeroDamping,

    #[error("tensor oracle supports at most {max} particles, got {got}")]
    EnsembleTooLarge { got: usize, max: usize },

    #[error("grid under-resolved: {0}")]
    GridUnderResolved(String),

    #[error("norm drifted by {drift:e} at step {step}")]
    NormDrift { drift: f64, step: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid("t", format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}
