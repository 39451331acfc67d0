mod common;

use clustermpc::lp::{solve_lp, LpStatus, LpTolerances, Relation};
use clustermpc::milp::{solve_milp, BranchAndBound, MilpModel, MilpStatus, SolverOptions, VarSpec};
use proptest::prelude::*;

fn bound_of(line: &str) -> Option<f64> {
    line.split_whitespace()
        .find_map(|t| t.strip_prefix("bound="))
        .and_then(|v| v.parse().ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn logged_bound_never_decreases(seed in 0u64..10_000) {
        let model = common::random_model(seed, 10, 5);
        let opts = SolverOptions::default();
        let mut log = Vec::new();
        let out = BranchAndBound::new(&model, &opts).log_to(&mut log).solve().unwrap();
        let text = String::from_utf8(log).unwrap();
        let bounds: Vec<f64> = text.lines().filter_map(bound_of).filter(|b| b.is_finite()).collect();
        for w in bounds.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{} then {}", w[0], w[1]);
        }
        if let Some(v) = out.objective_value {
            prop_assert!(out.best_bound <= v + 1e-9);
        }
    }

    #[test]
    fn solves_are_deterministic(seed in 0u64..10_000) {
        let model = common::random_model(seed, 10, 5);
        let opts = SolverOptions::default();
        let a = solve_milp(&model, &opts).unwrap();
        let b = solve_milp(&model, &opts).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.nodes_explored, b.nodes_explored);
        prop_assert_eq!(a.incumbent, b.incumbent);
        prop_assert_eq!(a.objective_value.map(f64::to_bits), b.objective_value.map(f64::to_bits));
    }

    #[test]
    fn relaxation_preserves_values(seed in 0u64..10_000, t in prop::collection::vec(0.0f64..1.0, 18)) {
        let model = common::random_model(seed, 10, 8);
        let lp = model.relax();
        let x: Vec<f64> = model
            .vars()
            .iter()
            .zip(t.iter().cycle())
            .map(|(v, &s)| v.lo + s * (v.hi - v.lo))
            .collect();
        prop_assert!((model.objective_value(&x) - lp.objective_at(&x)).abs() <= 1e-9);
        prop_assert!((model.max_violation(&x) - lp.max_violation(&x)).abs() <= 1e-9);
        prop_assert_eq!(lp.num_vars, model.num_vars());
        prop_assert_eq!(lp.constraints.len(), model.num_constraints());
    }

    #[test]
    fn warm_start_from_optimum_stays_optimal(seed in 0u64..10_000) {
        let model = common::random_model(seed, 8, 4);
        let opts = SolverOptions::default();
        let cold = solve_milp(&model, &opts).unwrap();
        if let Some(x) = &cold.incumbent {
            let warm = BranchAndBound::new(&model, &opts).warm_start(x).solve().unwrap();
            prop_assert_eq!(warm.status, MilpStatus::Optimal);
            prop_assert!((warm.objective_value.unwrap() - cold.objective_value.unwrap()).abs() <= 1e-6);
        }
    }
}

#[test]
fn continuous_model_matches_lp() {
    for seed in 0..50 {
        let mut model = MilpModel::new();
        let src = common::random_model(seed, 1, 6);
        let mut handles = Vec::new();
        for v in src.vars().iter().filter(|v| !v.is_binary()) {
            handles.push(
                model
                    .add_var(VarSpec::continuous(v.name.clone(), v.lo, v.hi))
                    .unwrap(),
            );
        }
        let x = handles.len();
        for (h, c) in handles
            .iter()
            .zip(src.objective().iter().skip(src.num_vars() - x))
        {
            model.set_objective_coeff(*h, *c).unwrap();
        }
        if let Some(&h) = handles.first() {
            model
                .add_constraint(&[(h, 1.0)], Relation::Le, 1.0)
                .unwrap();
        }
        let lp = solve_lp(&model.relax(), &LpTolerances::default()).unwrap();
        let out = solve_milp(&model, &SolverOptions::default()).unwrap();
        match lp.status {
            LpStatus::Optimal => {
                assert_eq!(out.status, MilpStatus::Optimal);
                assert!((out.objective_value.unwrap() - lp.objective_value.unwrap()).abs() <= 1e-9);
                assert!(out.nodes_explored <= 1);
            }
            LpStatus::Infeasible => assert_eq!(out.status, MilpStatus::Infeasible),
            LpStatus::Unbounded => assert_eq!(out.status, MilpStatus::Unbounded),
        }
    }
}

#[test]
fn empty_row_with_negative_rhs_is_infeasible() {
    let mut m = MilpModel::new();
    m.add_var(VarSpec::binary("b")).unwrap();
    m.add_constraint(&[], Relation::Le, -1.0).unwrap();
    let out = solve_milp(&m, &SolverOptions::default()).unwrap();
    assert_eq!(out.status, MilpStatus::Infeasible);
    assert!(out.incumbent.is_none());
}

#[test]
fn infeasible_warm_start_is_ignored() {
    let mut m = MilpModel::new();
    let a = m.add_var(VarSpec::binary("a")).unwrap();
    let b = m.add_var(VarSpec::binary("b")).unwrap();
    m.set_objective_coeff(a, -1.0).unwrap();
    m.set_objective_coeff(b, -2.0).unwrap();
    m.add_constraint(&[(a, 1.0), (b, 1.0)], Relation::Le, 1.0)
        .unwrap();
    let opts = SolverOptions::default();
    let bad = [1.0, 1.0];
    let out = BranchAndBound::new(&m, &opts)
        .warm_start(&bad)
        .solve()
        .unwrap();
    assert_eq!(out.status, MilpStatus::Optimal);
    assert_eq!(out.objective_value, Some(-2.0));
    assert!(!out.incumbent_from_warm_start);
}
