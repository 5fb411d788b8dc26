use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Raising operator applied to a state with no atom left in `g`.
    #[error("raising operator applied to a state with no ground-level population")]
    RaisingOnFull,

    #[error("state has zero norm")]
    DegenerateState,

    #[error("brute-force representation limited to {max} atoms, got {n_atoms}")]
    SizeLimit { n_atoms: usize, max: usize },

    #[error("time grid too coarse: max rate x spacing = {product:.4} exceeds {limit}")]
    GridTooCoarse { product: f64, limit: f64 },

    #[error("integration did not converge: halving the step changed p_c by {delta:.3e}")]
    NonConvergence { delta: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by the inputs rather than by the numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::RaisingOnFull
                | Error::DegenerateState
                | Error::SizeLimit { .. }
                | Error::GridTooCoarse { .. }
                | Error::Infeasible(_)
        )
    }
}
