use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("hardening variable decreased from {before:e} to {after:e}")]
    KappaDecrease { before: f64, after: f64 },

    #[error("no non-negative plastic multiplier brackets the yield condition")]
    NegativeMultiplier,

    #[error("flow direction undefined on the hydrostatic axis (rho = {rho:e})")]
    DegenerateDirection { rho: f64 },

    #[error("apex tangent is singular (denominator {denominator:e})")]
    SingularTangent { denominator: f64 },

    #[error("mixed control did not converge at increment {increment} (residual {residual:e} MPa)")]
    OuterNonConvergence { increment: usize, residual: f64 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for failures of a numerical iteration, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::KappaDecrease { .. }
                | Error::NegativeMultiplier
                | Error::DegenerateDirection { .. }
                | Error::SingularTangent { .. }
                | Error::OuterNonConvergence { .. }
        )
    }
}
