//! Receding-horizon closed loop over the nominal dynamics.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::FormulationError;
use crate::formulation::{
    build, decode_plan, grouped_start, validate_plan, ClusterAssignment, Formulation, Mode, Plan,
    Rect, Scenario, Violation, ASSIGNMENT_PRIORITY, PLAN_TOL,
};
use crate::milp::{BranchAndBound, MilpStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    pub max_steps: usize,
    /// Seed every solve after the first with the shifted previous plan.
    pub warm_start: bool,
    /// In clustered mode, seed solves that have no shifted plan with
    /// [`grouped_start`].
    pub grouped_start: bool,
    /// In clustered mode, search below every new incumbent's assignment
    /// (sets [`SolverOptions::polish_class`]).
    pub polish_assignment: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            max_steps: 200,
            warm_start: true,
            grouped_start: true,
            polish_assignment: true,
        }
    }
}

/// One executed step of the closed loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    /// State at which the step's problem was solved.
    pub state: [f64; 4],
    pub applied_control: [f64; 2],
    pub j_star: f64,
    /// `Ĵ(k+1|k) = J*(k) − 1 − γ‖u(k|k)‖₁`.
    pub j_hat_next: f64,
    pub arrival_step: usize,
    pub cluster_info: Option<ClusterAssignment>,
    /// Decoded assignment differs from the previous step's.
    pub assignment_changed: bool,
    pub solver_status: MilpStatus,
    /// The solve ended on a limit and its incumbent was used.
    pub limit_reached: bool,
    pub incumbent_from_warm_start: bool,
    /// Seconds spent inside the solver.
    pub solve_time: f64,
    pub nodes_explored: u64,
}

/// Why the loop stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    ReachedTarget,
    MaxSteps,
    /// Step `k` had no feasible plan.
    Infeasible {
        k: usize,
    },
    /// Step `k` hit a solver limit before finding any incumbent.
    NoIncumbent {
        k: usize,
    },
    /// Step `k` produced a plan that failed validation.
    InvalidPlan {
        k: usize,
        violations: Vec<Violation>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub mode: Mode,
    pub initial_state: [f64; 4],
    pub steps: Vec<StepRecord>,
    /// State after the last applied control.
    pub final_state: [f64; 4],
    /// `Σ_k (1 + γ‖u[k]‖₁)` over executed steps.
    pub closed_loop_cost: f64,
    pub reached_target: bool,
    pub total_solve_time: f64,
    pub termination: Termination,
}

impl Trace {
    /// A trace with no executed steps.
    pub fn empty(mode: Mode, x0: [f64; 4]) -> Self {
        Self {
            mode,
            initial_state: x0,
            steps: Vec::new(),
            final_state: x0,
            closed_loop_cost: 0.0,
            reached_target: false,
            total_solve_time: 0.0,
            termination: Termination::MaxSteps,
        }
    }

    /// Executed positions including the initial and final states.
    pub fn states(&self) -> Vec<[f64; 4]> {
        let mut out: Vec<[f64; 4]> = self.steps.iter().map(|s| s.state).collect();
        out.push(self.final_state);
        out
    }

    pub fn total_nodes(&self) -> u64 {
        self.steps.iter().map(|s| s.nodes_explored).sum()
    }
}

/// `J − 1 − γ‖u0‖₁`.
pub fn predicted_cost(j_star: f64, u0: &[f64; 2], gamma: f64) -> f64 {
    j_star - 1.0 - gamma * (u0[0].abs() + u0[1].abs())
}

fn step_state(scn: &Scenario, x: &[f64; 4], u: &[f64; 2]) -> [f64; 4] {
    let v = scn.dynamics.step(x, u);
    [v[0], v[1], v[2], v[3]]
}

/// Solves from the measured state at every step, applies the first control
/// and advances the nominal dynamics until the terminal box is reached.
pub fn run_receding_horizon(
    scn: &Scenario,
    x0: &[f64; 4],
    mode: Mode,
    opts: &SolverOptions,
    sim: &SimOptions,
) -> Result<Trace, FormulationError> {
    scn.validate()?;
    scn.check_initial_state(x0)?;
    let mut trace = Trace::empty(mode, *x0);
    let clustered = matches!(mode, Mode::Clustered(_));
    let mut opts = opts.clone();
    if clustered && sim.polish_assignment && opts.polish_class.is_none() {
        opts.polish_class = Some(ASSIGNMENT_PRIORITY);
    }
    let opts = &opts;
    let mut state = *x0;
    let mut previous: Option<Plan> = None;
    for k in 0..sim.max_steps {
        if scn.terminal.contains(&state, PLAN_TOL) {
            trace.reached_target = true;
            trace.termination = Termination::ReachedTarget;
            break;
        }
        let form = build(scn, &state, mode)?;
        let start = Instant::now();
        let mut seed = previous
            .as_ref()
            .filter(|_| sim.warm_start)
            .and_then(|p| shifted_tail(&form, p, &state, scn));
        if seed.is_none() && clustered && sim.grouped_start {
            seed = grouped_start(&form, scn, opts)?;
        }
        let mut bnb = BranchAndBound::new(&form.model, opts);
        if let Some(ws) = &seed {
            bnb = bnb.warm_start(ws);
        }
        let outcome = bnb.solve()?;
        let solve_time = start.elapsed().as_secs_f64();
        trace.total_solve_time += solve_time;
        match outcome.status {
            MilpStatus::Infeasible | MilpStatus::Unbounded => {
                trace.termination = Termination::Infeasible { k };
                break;
            }
            MilpStatus::LimitReached if !outcome.has_incumbent() => {
                trace.termination = Termination::NoIncumbent { k };
                break;
            }
            _ => {}
        }
        let plan = decode_plan(&form, &outcome, scn)?;
        let report = validate_plan(&plan, scn);
        if !report.is_clean() {
            trace.termination = Termination::InvalidPlan {
                k,
                violations: report.violations,
            };
            break;
        }
        let j_star = outcome.objective_value.unwrap_or(plan.cost);
        let u0 = plan.controls[0];
        let assignment_changed = match (
            &plan.clusters,
            previous.as_ref().and_then(|p| p.clusters.as_ref()),
        ) {
            (Some(now), Some(before)) => !now.same_assignment(before),
            _ => false,
        };
        trace.steps.push(StepRecord {
            k,
            state,
            applied_control: u0,
            j_star,
            j_hat_next: predicted_cost(j_star, &u0, scn.gamma),
            arrival_step: plan.arrival_step,
            cluster_info: plan.clusters.clone(),
            assignment_changed,
            solver_status: outcome.status,
            limit_reached: outcome.status == MilpStatus::LimitReached,
            incumbent_from_warm_start: outcome.incumbent_from_warm_start,
            solve_time,
            nodes_explored: outcome.nodes_explored,
        });
        trace.closed_loop_cost += 1.0 + scn.gamma * (u0[0].abs() + u0[1].abs());
        state = step_state(scn, &state, &u0);
        trace.final_state = state;
        if plan.arrival_step == 1 {
            trace.reached_target = scn.terminal.contains(&state, PLAN_TOL);
            trace.termination = if trace.reached_target {
                Termination::ReachedTarget
            } else {
                Termination::InvalidPlan {
                    k,
                    violations: vec![Violation::Terminal { step: 1 }],
                }
            };
            return Ok(trace);
        }
        previous = Some(plan);
    }
    if !trace.reached_target
        && scn.terminal.contains(&state, PLAN_TOL)
        && trace.termination == Termination::MaxSteps
    {
        trace.reached_target = true;
        trace.termination = Termination::ReachedTarget;
    }
    Ok(trace)
}

/// Assignment of `form` that replays `plan` one step later: controls shifted
/// by one with a zero control appended, states propagated from `state`,
/// the same clusters, and side binaries read off the geometry.
fn shifted_tail(
    form: &Formulation,
    plan: &Plan,
    state: &[f64; 4],
    scn: &Scenario,
) -> Option<Vec<f64>> {
    if plan.arrival_step < 2 {
        return None;
    }
    let lay = &form.layout;
    let ns = lay.ns;
    let mut x = vec![0.0; form.model.num_vars()];
    let mut controls: Vec<[f64; 2]> = plan.controls[1..].to_vec();
    controls.resize(ns + 1, [0.0, 0.0]);
    let mut states = vec![*state];
    for j in 0..=ns {
        let next = step_state(scn, &states[j], &controls[j]);
        states.push(next);
    }
    for (j, s) in states.iter().enumerate() {
        for c in 0..4 {
            x[lay.states[j][c]] = s[c];
        }
    }
    for (j, u) in controls.iter().enumerate() {
        for c in 0..2 {
            x[lay.controls[j][c]] = u[c];
            x[lay.effort[j][c]] = u[c].abs();
        }
    }
    x[lay.arrival[plan.arrival_step - 2]] = 1.0;
    let sides = |r: &Rect, p: &[f64; 4]| -> Option<[f64; 4]> {
        let ok = [
            p[0] <= r.x_min,
            p[2] <= r.y_min,
            p[0] >= r.x_max,
            p[2] >= r.y_max,
        ];
        ok.iter()
            .any(|&v| v)
            .then(|| ok.map(|v| if v { 0.0 } else { 1.0 }))
    };
    match lay.mode {
        Mode::Unclustered => {
            let no = lay.num_obstacles;
            for j in 1..=ns + 1 {
                for (i, o) in scn.obstacles.iter().enumerate() {
                    let b = sides(o, &states[j])?;
                    for (s, &k) in lay.obstacle_bins[(j - 1) * no + i].iter().enumerate() {
                        x[k] = b[s];
                    }
                }
            }
        }
        Mode::Clustered(nc) => {
            let info = plan.clusters.as_ref()?;
            let no = lay.num_obstacles;
            for (l, r) in info.clusters.iter().enumerate() {
                let c = lay.cluster_coords[l];
                x[c[0]] = r.x_min;
                x[c[1]] = r.y_min;
                x[c[2]] = r.x_max;
                x[c[3]] = r.y_max;
                for i in 0..no {
                    x[lay.assignment[l * no + i]] = if info.assignment[l][i] { 1.0 } else { 0.0 };
                }
            }
            for j in 1..=ns + 1 {
                for (l, r) in info.clusters.iter().enumerate() {
                    let b = sides(r, &states[j])?;
                    for (s, &k) in lay.cluster_bins[(j - 1) * nc + l].iter().enumerate() {
                        x[k] = b[s];
                    }
                }
            }
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_cost_formula() {
        assert_eq!(predicted_cost(10.0, &[1.5, -0.5], 1.0), 7.0);
        assert_eq!(predicted_cost(4.25, &[0.0, 0.0], 3.0), 3.25);
        assert!((predicted_cost(22.4, &[0.25, -0.35], 1.0) - 20.8).abs() < 1e-12);
    }
}
