use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its admissible range ({range})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("no saddle Q_eps: need alpha*omega < sqrt(2)*|beta|, got alpha*omega = {lhs} >= {rhs}")]
    NoSaddle { lhs: f64, rhs: f64 },
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("a^2 + b^2 = {0} must exceed 1 for a growing mode")]
    SubcriticalAmplitude(f64),
    #[error("eigenfunction vanishes; the Darboux quotient is undefined")]
    ZeroEigenfunction,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    InvalidOrder(u32),
    #[error("quadrature not converged: relative change {change:.3e} under refinement exceeds {tolerance:.1e}")]
    QuadratureNotConverged { change: f64, tolerance: f64 },
    #[error("cos(gamma1) = {0} lies outside [-1, 1]")]
    Infeasible(f64),
    #[error("denominator of alpha(omega) is {denominator:.3e} at omega = {omega}, too close to zero")]
    DenominatorNearZero { omega: f64, denominator: f64 },
    #[error("action variable {0:.3e} too close to zero for the 1/sqrt(I) terms")]
    VanishingAction(f64),
    #[error("Newton iteration did not converge (residual {0:.3e})")]
    NoConvergence(f64),
    #[error("integrator step size underflow at t = {0}")]
    StepFailure(f64),
    #[error("field amplitude {amplitude:.3e} exceeded bound at t = {time}")]
    BlowUp { time: f64, amplitude: f64 },
    #[error("exponential fit failed: {0}")]
    FitFailure(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numerical,
    Infeasible,
    BlowUp,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::OutOfRange { .. }
            | Error::NegativeEpsilon(_)
            | Error::SubcriticalAmplitude(_)
            | Error::InvalidGrid(_)
            | Error::InvalidOrder(_)
            | Error::InvalidConfig(_) => ErrorCategory::Config,
            Error::NoSaddle { .. } | Error::Infeasible(_) | Error::DenominatorNearZero { .. } => {
                ErrorCategory::Infeasible
            }
            Error::BlowUp { .. } => ErrorCategory::BlowUp,
            Error::ZeroEigenfunction
            | Error::QuadratureNotConverged { .. }
            | Error::VanishingAction(_)
            | Error::NoConvergence(_)
            | Error::StepFailure(_)
            | Error::FitFailure(_) => ErrorCategory::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
