use thiserror::Error;

/// Errors raised by the numeric kernels, constructors and simulators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("quadrature on [{a}, {b}] did not converge within {evals} evaluations")]
    NoConvergence { a: f64, b: f64, evals: usize },

    #[error("non-finite value {value} at t = {t}")]
    NonFinite { t: f64, value: f64 },

    #[error("solution left the positive half-line at t = {t} (value {value})")]
    Breakdown { t: f64, value: f64 },

    #[error("grid: {0}")]
    Grid(String),

    #[error("tail of {0} is not integrable")]
    DivergentTail(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("policy accepted twice in one run")]
    DoubleAccept,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        domain,
    }
}
