use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        module: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("numeric failure: {message} (residual {residual:e})")]
    NumericFailure {
        module: &'static str,
        message: String,
        residual: f64,
    },

    #[error("bisection bracket failure: {0}")]
    Bracket(String),

    #[error("no envelope constant up to {cap} satisfies the envelope inequalities (worst edge {worst_edge})")]
    EnvelopeFailure { cap: f64, worst_edge: String },

    #[error("point {0} lies outside the table")]
    OutOfTable(String),

    #[error("dimension or kind mismatch: {0}")]
    Mismatch(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("all {0} replicates were censored")]
    EstimateUnusable(usize),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Module that raised the error, for machine-readable reports.
    pub fn module(&self) -> &'static str {
        match self {
            Error::NonConvergence { module, .. } | Error::NumericFailure { module, .. } => module,
            Error::DomainTooSmall(_) => "lattice",
            Error::Bracket(_) => "grade",
            Error::EnvelopeFailure { .. } | Error::Quadrature(_) => "bounds",
            Error::OutOfTable(_) | Error::Mismatch(_) => "harmonic",
            Error::EstimateUnusable(_) => "montecarlo",
            Error::Cache(_) | Error::Io(_) => "cache",
            Error::InvalidInput(_) => "input",
        }
    }

    /// Short stable identifier of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DomainTooSmall(_) => "domain-too-small",
            Error::NonConvergence { .. } => "non-convergence",
            Error::NumericFailure { .. } => "numeric-failure",
            Error::Bracket(_) => "bracket",
            Error::EnvelopeFailure { .. } => "envelope-failure",
            Error::OutOfTable(_) => "out-of-table",
            Error::Mismatch(_) => "mismatch",
            Error::Quadrature(_) => "quadrature",
            Error::EstimateUnusable(_) => "estimate-unusable",
            Error::Cache(_) => "cache",
            Error::Io(_) => "io",
        }
    }
}
