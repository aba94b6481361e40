use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated the operation's precondition.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A confinement radius or measure was requested outside its valid interval.
    #[error("{what} requires r in {interval}, got r = {r}")]
    Regime {
        what: &'static str,
        interval: &'static str,
        r: f64,
    },

    #[error("region too small for rejection sampling at this r (n = {n}, r = {r}, {proposals} proposals, 0 accepted)")]
    Exhausted { n: usize, r: f64, proposals: u64 },

    #[error("proposal budget of {budget} spent with {accepted} of {requested} samples accepted")]
    BudgetSpent {
        budget: u64,
        accepted: usize,
        requested: usize,
    },

    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }

    /// True for the errors the CLI maps to the sampler-exhaustion exit code.
    pub fn is_exhaustion(&self) -> bool {
        matches!(self, Error::Exhausted { .. } | Error::BudgetSpent { .. })
    }
}
