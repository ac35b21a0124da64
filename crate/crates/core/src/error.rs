use thiserror::Error;

use crate::trainer::RankTrajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix already has full rank {rank}")]
    FullRank { rank: usize },

    #[error("perturbation {eps:e} is not below the smallest retained singular value {sigma_r:e}")]
    PerturbationTooLarge { eps: f64, sigma_r: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("closed-form gradient requires a linear network")]
    UnsupportedActivation,

    #[error("expected a two-layer network, got depth {depth}")]
    UnsupportedDepth { depth: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("could not generate a certified dataset after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("training diverged at iteration {iteration} (loss {loss:e})")]
    Divergence {
        iteration: usize,
        loss: f64,
        trajectory: Box<RankTrajectory>,
    },

    #[error("SVD did not converge")]
    SvdFailed,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
