use thiserror::Error;

use crate::flow::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is rank deficient: numerical rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("node index {index} out of range 1..={n_nodes}")]
    InvalidNode { index: usize, n_nodes: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph family needs at least 3 nodes, got {0}")]
    TooSmall(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("no closed-form minimum support for {family} with n = {n}")]
    NotCharacterized { family: String, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("method not applicable: {0}")]
    NotApplicable(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("system matrix has no eigenvalues with nonzero real part")]
    NoStableModes,

    #[error("convergence condition does not hold on this graph")]
    ConditionViolated,

    #[error("equilibrium system is inconsistent (residual {residual:.3e})")]
    EquilibriumInfeasible { residual: f64 },

    #[error("state diverged at t = {at}")]
    Diverged { at: f64, partial: Box<Trajectory> },

    #[error("step {step} does not divide switching period {period}")]
    StepAlignment { step: f64, period: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
