//! Plaintext optimization core: the coupled convex program, its Lagrangian
//! subgradients, and the shrunken / regularized primal-dual subgradient
//! iterations. The plaintext solver doubles as the no-encryption baseline.

mod problem;
mod solver;

pub use problem::{
    dual_subgradient, eval_objective, primal_subgradient, primal_subgradient_from_aggregate,
    project_box, AgentSpec, BoxSet, LocalObjective, PrimalPoint, ProblemSpec,
};
pub use solver::{
    dual_update, primal_update, rpds_step, run_iterations, solve_plaintext, spds_step,
    stopping_error, Method, PrimalDualState, SolverParams, Trajectory,
};
