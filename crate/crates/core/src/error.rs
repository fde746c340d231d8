use thiserror::Error;

/// Errors produced by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RabiError {
    /// An input violated a model or configuration invariant.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative routine failed to reach its tolerance.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// An energy denominator of the perturbation expansion is not positive.
    #[error("degenerate denominator at {state}: gap = {gap:e}")]
    DegenerateDenominator { state: String, gap: f64 },

    /// A sweep point lacks the exact-diagonalization reference value.
    #[error("missing oracle value at x = {x}")]
    MissingOracle { x: f64 },
}

impl RabiError {
    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            RabiError::Domain(_) => "domain",
            RabiError::Convergence(_) => "convergence",
            RabiError::DegenerateDenominator { .. } => "degenerate_denominator",
            RabiError::MissingOracle { .. } => "missing_oracle",
        }
    }
}

pub type Result<T> = std::result::Result<T, RabiError>;
