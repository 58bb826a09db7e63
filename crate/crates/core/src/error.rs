use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence in {what} (residual {residual:e})")]
    NoConvergence { what: &'static str, residual: f64 },

    #[error("quadrature truncation not converged: tail estimate {tail:e} exceeds {tol:e}")]
    Accuracy { tail: f64, tol: f64 },

    #[error("amplitude is singular on a caustic (J = {jac:e})")]
    Caustic { jac: f64 },

    #[error("{0} is not covered by the leading-order expansions")]
    Unsupported(&'static str),

    #[error("search failed: {0}")]
    Search(String),

    #[error("value overflows f64 (log10 = {log10})")]
    Overflow { log10: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
