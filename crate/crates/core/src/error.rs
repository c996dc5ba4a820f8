use std::io;

/// Errors raised by the channel model, the simulator and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{name} out of domain: {detail}")]
    Domain { name: &'static str, detail: String },

    #[error("quadrature did not converge: error estimate {error:e} after {intervals} subintervals")]
    Convergence { error: f64, intervals: usize },

    #[error("expected receiver count {expected:.3e} exceeds cap {cap:.3e}")]
    Capacity { expected: f64, cap: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("escape rate {rate:.3e} exceeds limit {limit:.1e}; increase the domain multiplier")]
    EscapeRate { rate: f64, limit: f64 },

    #[error("config error in `{field}`: {detail}")]
    Config { field: String, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        name,
        detail: detail.into(),
    }
}

pub(crate) fn config(field: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        detail: detail.into(),
    }
}
