#![allow(dead_code)]

use clustermpc::formulation::{BigM, Rect, Scenario, StateBox};
use clustermpc::lp::{solve_lp, LpStatus, LpTolerances, Relation};
use clustermpc::milp::{MilpModel, VarSpec};
use clustermpc::{double_integrator_2d, zoh_discretize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Enumerates every binary assignment and solves the residual LP.
/// Returns `None` when no assignment is feasible.
pub fn brute_force(model: &MilpModel) -> Option<(f64, Vec<f64>)> {
    let bins = model.binary_indices();
    assert!(bins.len() <= 16, "oracle limited to 16 binaries");
    let base = model.relax();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut lp = base.clone();
        for (k, &j) in bins.iter().enumerate() {
            let v = if mask & (1 << k) != 0 { 1.0 } else { 0.0 };
            lp.var_bounds[j] = (v, v);
        }
        let out = solve_lp(&lp, &LpTolerances::default()).expect("well-formed LP");
        if out.status == LpStatus::Optimal {
            let obj = out.objective_value.unwrap();
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, out.solution.unwrap()));
            }
        }
    }
    best
}

/// Random mixed-binary model with bounded continuous variables.
pub fn random_model(seed: u64, max_bins: usize, max_cont: usize) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.random_range(1..=max_bins);
    let nc = rng.random_range(0..=max_cont);
    let mut m = MilpModel::new();
    let mut handles = Vec::new();
    for k in 0..nb {
        handles.push(m.add_var(VarSpec::binary(format!("b{k}"))).unwrap());
    }
    for k in 0..nc {
        let lo = rng.random_range(-5.0..0.0);
        let hi = rng.random_range(0.0..5.0);
        handles.push(
            m.add_var(VarSpec::continuous(format!("x{k}"), lo, hi))
                .unwrap(),
        );
    }
    for &h in &handles {
        let c: f64 = rng.random_range(-10.0..10.0);
        m.set_objective_coeff(h, (c * 4.0).round() / 4.0).unwrap();
    }
    let rows = rng.random_range(1..=(nb + nc).min(10));
    for _ in 0..rows {
        let mut terms = Vec::new();
        for &h in &handles {
            if rng.random_bool(0.5) {
                let a: f64 = rng.random_range(-5.0..5.0);
                terms.push((h, (a * 2.0).round() / 2.0));
            }
        }
        let rel = match rng.random_range(0..6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        let rhs: f64 = rng.random_range(-4.0..6.0);
        m.add_constraint(&terms, rel, (rhs * 2.0).round() / 2.0)
            .unwrap();
    }
    m
}

/// Planar scenario on `[0, 12] × [0, 10]` with unit sampling time and a
/// terminal box around `(11, 5)` that requires near rest.
pub fn box_scenario(obstacles: Vec<Rect>, ns: usize) -> Scenario {
    let workspace = Rect::new(0.0, 0.0, 12.0, 10.0);
    Scenario {
        dynamics: zoh_discretize(&double_integrator_2d(), 1.0).unwrap(),
        workspace,
        big_m: BigM::derived(&workspace, &obstacles),
        obstacles,
        terminal: StateBox {
            lo: [10.5, -0.005, 4.5, -0.005],
            hi: [11.5, 0.005, 5.5, 0.005],
        },
        v_max: 2.0,
        a_max: 1.0,
        gamma: 1.0,
        ns,
        symmetry_breaking: false,
    }
}

pub const START: [f64; 4] = [0.5, 0.0, 5.0, 0.0];

/// Adds `x_j = v` for column `j`.
pub fn pin(model: &mut MilpModel, j: usize, v: f64) {
    let h = model.handle_by_name(&model.vars()[j].name.clone()).unwrap();
    model.add_constraint(&[(h, 1.0)], Relation::Eq, v).unwrap();
}
