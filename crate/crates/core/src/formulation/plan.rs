use serde::{Deserialize, Serialize};

use crate::error::FormulationError;
use crate::milp::MilpOutcome;

use super::build::{Formulation, Mode};
use super::scenario::{Rect, Scenario};

/// Tolerance of every check in [`validate_plan`].
pub const PLAN_TOL: f64 = 1e-6;

/// Decoded cluster rectangles and the cluster-obstacle assignment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: Vec<Rect>,
    /// `assignment[ℓ][i]` is true when obstacle `i` belongs to cluster `ℓ`.
    pub assignment: Vec<Vec<bool>>,
}

impl ClusterAssignment {
    /// Zero-based obstacle indices assigned to cluster `l`.
    pub fn members(&self, l: usize) -> Vec<usize> {
        self.assignment[l]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn same_assignment(&self, other: &ClusterAssignment) -> bool {
        self.assignment == other.assignment
    }
}

/// One open-loop solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub mode: Mode,
    /// Predicted states `j = 0..=ns+1`.
    pub states: Vec<[f64; 4]>,
    /// Predicted controls `j = 0..=ns`.
    pub controls: Vec<[f64; 2]>,
    /// Step at which the terminal binary fires (`1..=ns+1`).
    pub arrival_step: usize,
    /// `arrival_step + γ·Σ‖u‖₁`.
    pub cost: f64,
    pub gamma: f64,
    pub clusters: Option<ClusterAssignment>,
    /// b^O (unclustered) or b^C (clustered) in layout order, four per
    /// (step, rectangle) pair.
    pub avoidance_binaries: Vec<[bool; 4]>,
}

impl Plan {
    pub fn effort(&self) -> f64 {
        self.controls.iter().map(|u| u[0].abs() + u[1].abs()).sum()
    }
}

/// Reads a plan out of a solver assignment.
pub fn decode_plan(
    form: &Formulation,
    outcome: &MilpOutcome,
    scn: &Scenario,
) -> Result<Plan, FormulationError> {
    let x = outcome
        .incumbent
        .as_deref()
        .ok_or(FormulationError::NoIncumbent)?;
    decode_assignment(form, x, scn)
}

pub fn decode_assignment(
    form: &Formulation,
    x: &[f64],
    scn: &Scenario,
) -> Result<Plan, FormulationError> {
    let lay = &form.layout;
    if x.len() != form.model.num_vars() {
        return Err(FormulationError::SolutionLength {
            expected: form.model.num_vars(),
            found: x.len(),
        });
    }
    let states: Vec<[f64; 4]> = lay.states.iter().map(|s| s.map(|k| x[k])).collect();
    let controls: Vec<[f64; 2]> = lay.controls.iter().map(|u| u.map(|k| x[k])).collect();
    let arrival_step = lay
        .arrival
        .iter()
        .position(|&k| x[k] > 0.5)
        .map(|p| p + 1)
        .ok_or(FormulationError::NoIncumbent)?;
    let bins = |v: &[usize; 4]| v.map(|k| x[k] > 0.5);
    let (clusters, avoidance_binaries) = match lay.mode {
        Mode::Unclustered => (None, lay.obstacle_bins.iter().map(bins).collect()),
        Mode::Clustered(nc) => {
            let no = lay.num_obstacles;
            let rects = lay
                .cluster_coords
                .iter()
                .map(|c| Rect::new(x[c[0]], x[c[1]], x[c[2]], x[c[3]]))
                .collect();
            let assignment = (0..nc)
                .map(|l| {
                    (0..no)
                        .map(|i| x[lay.assignment[l * no + i]] > 0.5)
                        .collect()
                })
                .collect();
            (
                Some(ClusterAssignment {
                    clusters: rects,
                    assignment,
                }),
                lay.cluster_bins.iter().map(bins).collect(),
            )
        }
    };
    let mut plan = Plan {
        mode: lay.mode,
        states,
        controls,
        arrival_step,
        cost: 0.0,
        gamma: scn.gamma,
        clusters,
        avoidance_binaries,
    };
    plan.cost = arrival_step as f64 + scn.gamma * plan.effort();
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// `x[j+1] ≠ A x[j] + B u[j]`.
    Dynamics {
        step: usize,
        error: f64,
    },
    StateBound {
        step: usize,
        component: usize,
        value: f64,
    },
    ControlBound {
        step: usize,
        component: usize,
        value: f64,
    },
    OutsideWorkspace {
        step: usize,
    },
    Collision {
        step: usize,
        obstacle: usize,
    },
    ClusterCollision {
        step: usize,
        cluster: usize,
    },
    Containment {
        cluster: usize,
        obstacle: usize,
    },
    Assignment {
        obstacle: usize,
        count: usize,
    },
    Terminal {
        step: usize,
    },
    Cost {
        expected: f64,
        found: f64,
    },
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn collisions(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::Collision { .. }))
            .count()
    }
}

/// Independent certificate of a plan: dynamics, bounds, avoidance of every
/// obstacle (and cluster) up to arrival, containment, exactly-one
/// assignment, terminal membership and the cost identity.
pub fn validate_plan(plan: &Plan, scn: &Scenario) -> ValidationReport {
    let mut out = Vec::new();
    let ns = scn.ns;
    if plan.states.len() != ns + 2 || plan.controls.len() != ns + 1 {
        out.push(Violation::Shape(format!(
            "expected {} states and {} controls, found {} and {}",
            ns + 2,
            ns + 1,
            plan.states.len(),
            plan.controls.len()
        )));
        return ValidationReport { violations: out };
    }
    if plan.arrival_step < 1 || plan.arrival_step > ns + 1 {
        out.push(Violation::Shape(format!(
            "arrival step {} outside 1..={}",
            plan.arrival_step,
            ns + 1
        )));
        return ValidationReport { violations: out };
    }
    for j in 0..=ns {
        let next = scn.dynamics.step(&plan.states[j], &plan.controls[j]);
        let err = next
            .iter()
            .zip(&plan.states[j + 1])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err > PLAN_TOL {
            out.push(Violation::Dynamics {
                step: j,
                error: err,
            });
        }
    }
    for (j, x) in plan.states.iter().enumerate().skip(1) {
        for c in [1, 3] {
            if x[c].abs() > scn.v_max + PLAN_TOL {
                out.push(Violation::StateBound {
                    step: j,
                    component: c,
                    value: x[c],
                });
            }
        }
        if !scn.workspace.contains_point(x[0], x[2], PLAN_TOL) {
            out.push(Violation::OutsideWorkspace { step: j });
        }
    }
    for (j, u) in plan.controls.iter().enumerate() {
        for c in 0..2 {
            if u[c].abs() > scn.a_max + PLAN_TOL {
                out.push(Violation::ControlBound {
                    step: j,
                    component: c,
                    value: u[c],
                });
            }
        }
    }
    for j in 1..=plan.arrival_step {
        let x = &plan.states[j];
        for (i, o) in scn.obstacles.iter().enumerate() {
            if o.contains_interior(x[0], x[2], PLAN_TOL) {
                out.push(Violation::Collision {
                    step: j,
                    obstacle: i,
                });
            }
        }
        if let Some(ca) = &plan.clusters {
            for (l, c) in ca.clusters.iter().enumerate() {
                if c.is_ordered() && c.contains_interior(x[0], x[2], PLAN_TOL) {
                    out.push(Violation::ClusterCollision {
                        step: j,
                        cluster: l,
                    });
                }
            }
        }
    }
    if let Some(ca) = &plan.clusters {
        let no = scn.obstacles.len();
        for i in 0..no {
            let mut count = 0;
            for (l, row) in ca.assignment.iter().enumerate() {
                if row.get(i).copied().unwrap_or(false) {
                    count += 1;
                    if !ca.clusters[l].contains_rect(&scn.obstacles[i], PLAN_TOL) {
                        out.push(Violation::Containment {
                            cluster: l,
                            obstacle: i,
                        });
                    }
                }
            }
            if count != 1 {
                out.push(Violation::Assignment { obstacle: i, count });
            }
        }
    }
    if !scn
        .terminal
        .contains(&plan.states[plan.arrival_step], PLAN_TOL)
    {
        out.push(Violation::Terminal {
            step: plan.arrival_step,
        });
    }
    let expected = plan.arrival_step as f64 + scn.gamma * plan.effort();
    if (expected - plan.cost).abs() > PLAN_TOL {
        out.push(Violation::Cost {
            expected,
            found: plan.cost,
        });
    }
    ValidationReport { violations: out }
}
