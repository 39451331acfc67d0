//! Variable-horizon MILP trajectory planning with obstacle avoidance.
//!
//! The crate carries its own LP simplex ([`lp`]) and branch-and-bound MILP
//! solver ([`milp`]). On top of those, [`formulation`] encodes the planning
//! problem either with per-obstacle big-M avoidance or with obstacle
//! clusters whose extent and membership are decided by the optimizer, and
//! [`simulator`] closes the loop in receding-horizon fashion.

#![allow(clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod formulation;
pub mod io;
pub mod lp;
pub mod milp;
pub mod simulator;

pub use dynamics::{double_integrator_2d, zoh_discretize, LtiContinuous, LtiDiscrete};
pub use error::{DynamicsError, FormulationError, IoError, LpError, ModelError, ScenarioError};
pub use formulation::{
    build_clustered, build_unclustered, count_binaries, decode_plan, validate_plan, BigM,
    ClusterAssignment, Mode, Plan, Rect, Scenario, StateBox, ValidationReport, Violation,
};
pub use lp::{solve_lp, LpOutcome, LpProblem, LpStatus, LpTolerances, Relation};
pub use milp::{solve_milp, BranchAndBound, MilpModel, MilpOutcome, MilpStatus, SolverOptions};
pub use simulator::{
    predicted_cost, run_receding_horizon, SimOptions, StepRecord, Termination, Trace,
};
