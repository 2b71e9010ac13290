use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("technology pair violates sigma_L > 1 > sigma_H > 0 (sigma_H = {sigma_h}, sigma_L = {sigma_l})")]
    AssumptionViolated { sigma_h: f64, sigma_l: f64 },

    #[error("a per-unit tax cannot be levied on high-quality content (tax = {0})")]
    TaxOnHighQuality(f64),

    #[error("verification fixed point did not converge after {iterations} iterations (residual {residual:e}, pollution {pollution})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        pollution: f64,
    },

    #[error("deadweight anchors are degenerate: W_so = {w_so} <= W_min = {w_min}")]
    DegenerateAnchors { w_so: f64, w_min: f64 },

    #[error("weights must be nonnegative and sum to 1 (sum = {sum})")]
    WeightSumViolation { sum: f64 },

    #[error("baseline churn rate is zero")]
    ZeroBaseline,

    #[error("{context}: {source}")]
    Cell {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Wrap with a cell annotation (sweep cell, scenario, world).
    pub fn in_cell(self, context: impl Into<String>) -> Self {
        Error::Cell {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Root cause, with any cell annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Cell { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_convergence_failure(&self) -> bool {
        matches!(self.root(), Error::NoConvergence { .. })
    }

    pub fn is_config_error(&self) -> bool {
        matches!(
            self.root(),
            Error::Config(_)
                | Error::InvalidParameter { .. }
                | Error::AssumptionViolated { .. }
                | Error::TaxOnHighQuality(_)
                | Error::WeightSumViolation { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
