use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("density vanishes at x = {x}; virtual value is singular")]
    Singularity { x: f64 },

    #[error("no reserve in support: virtual value has no sign change")]
    NoReserve,

    #[error("distribution is not regular (worst virtual-value decrease {worst_violation:e})")]
    NotRegular { worst_violation: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("node budget exceeded: {requested} nodes requested, budget is {budget}")]
    Budget { requested: u128, budget: usize },

    #[error("size limit exceeded: {n} nodes, limit is {limit} ({hint})")]
    SizeLimit { n: usize, limit: usize, hint: &'static str },

    #[error("fixed-point iteration did not converge after {iterations} iterations (best residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("unsupported distribution: {0}")]
    Unsupported(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short, stable tag used as a machine-parsable prefix by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Singularity { .. } => "singularity",
            Error::NoReserve => "no-reserve",
            Error::NotRegular { .. } => "not-regular",
            Error::InvalidDistribution(_) => "invalid-distribution",
            Error::Parse { .. } => "parse",
            Error::InvalidGraph(_) => "invalid-graph",
            Error::InfeasibleParams(_) => "infeasible-params",
            Error::Budget { .. } => "budget",
            Error::SizeLimit { .. } => "size-limit",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Unsupported(_) => "unsupported",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
