//! Mixed-binary models and the branch-and-bound solver.

pub mod bnb;
pub mod model;

pub use bnb::{
    solve_milp, BranchAndBound, Branching, MilpOutcome, MilpStatus, NodeSelection, SolverOptions,
};
pub use model::{ConstraintId, MilpModel, SparseConstraint, VarHandle, VarKind, VarSpec};
