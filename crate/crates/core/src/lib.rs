//! Solvers and analysis tools for distributed finite-sum optimization
//! with variational-inequality constraints.
//!
//! The model: `m` agents cooperatively minimize `Σ f_i(x)` over the
//! solution set of `VI(X, Σ F_i)`, where each agent only knows its own
//! convex `f_i` and monotone `F_i`. The main solver is pair-IG, a
//! single-timescale incremental method with iterative regularization and
//! distributed weighted averaging; baseline incremental methods, a
//! regularized reference solver, and evaluators for the theoretical rate
//! bounds round out the toolkit.
//!
//! Everything numeric is generic over the floating-point type through
//! [`Scalar`]; the `*64` aliases fix `f64` for ordinary use.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problem;
pub mod scalar;
pub mod schedule;
pub mod solver;
pub mod trace;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use geometry::{Halfspace, SetSpec};
pub use oracle::{AgentOracle, BasicAgent, ConstraintBlock, Inequality, PenaltyAgent};
pub use problem::{ProblemMetadata, ViProblem};
pub use schedule::Schedule;
pub use solver::{run_pair_ig, RunOptions, RunOutput};
pub use trace::{LogSchedule, RunTrace};

/// `f64` instantiations of the core types.
pub type SetSpec64 = geometry::SetSpec<f64>;
pub type ViProblem64 = problem::ViProblem<f64>;
pub type Schedule64 = schedule::Schedule<f64>;
pub type RunOptions64 = solver::RunOptions<f64>;
pub type RunTrace64 = trace::RunTrace<f64>;
pub type ConstantsEstimate64 = metrics::ConstantsEstimate<f64>;
