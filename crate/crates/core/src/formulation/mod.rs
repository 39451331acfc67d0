//! Translation of a planning instance into a MILP, and back.

mod build;
mod heuristic;
mod plan;
mod scenario;

pub use build::{
    avoidance_steps, build, build_clustered, build_unclustered, count_binaries, Formulation,
    Layout, Mode, ARRIVAL_PRIORITY, ASSIGNMENT_PRIORITY,
};
pub use heuristic::{extend_clusters, group_obstacles, grouped_start};
pub use plan::{
    decode_assignment, decode_plan, validate_plan, ClusterAssignment, Plan, ValidationReport,
    Violation, PLAN_TOL,
};
pub use scenario::{BigM, Rect, Scenario, StateBox};
