//! Distributed least squares over networks: the primal-dual network flow,
//! the spectral condition for its convergence, the step-size threshold of its
//! Euler discretisation, and switching-topology simulation.

pub mod eigen;
pub mod error;
pub mod flow;
pub mod graph;
pub mod linalg;
pub mod problem;
pub mod scenarios;
pub mod spectral;
pub mod switching;

pub use error::{Error, Result};
pub use flow::{ContinuousConfig, DiscreteConfig, Sample, Trajectory};
pub use graph::{Family, Graph};
pub use problem::{LeastSquaresSolution, NetworkLinearEquation};
pub use spectral::{AssembledFlow, ConditionMethod, ConditionVerdict};
pub use switching::{LimitSet, SwitchingSignal};
