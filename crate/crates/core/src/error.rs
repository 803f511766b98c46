use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("support cap of {cap} exceeded at iteration {iteration} (support {support})")]
    SupportCapExceeded {
        iteration: usize,
        support: usize,
        cap: usize,
    },

    #[error("bracket violation: proxy({mu_lo}) = {proxy_lo}, proxy({mu_hi}) = {proxy_hi}, threshold {threshold}")]
    Bracket {
        mu_lo: f64,
        mu_hi: f64,
        proxy_lo: f64,
        proxy_hi: f64,
        threshold: f64,
    },

    #[error("supercritical configuration: m = {m} >= 1 (d = {d}, mean = {eta_mean})")]
    Supercritical { d: usize, eta_mean: f64, m: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
