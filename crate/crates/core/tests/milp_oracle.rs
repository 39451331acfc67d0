mod common;

use clustermpc::milp::{solve_milp, MilpStatus, SolverOptions};

#[test]
fn random_instances_match_enumeration() {
    let opts = SolverOptions::default();
    for seed in 0..300 {
        let model = common::random_model(seed, 10, 8);
        let oracle = common::brute_force(&model);
        let out = solve_milp(&model, &opts).unwrap();
        match oracle {
            None => assert_eq!(out.status, MilpStatus::Infeasible, "seed {seed}"),
            Some((obj, _)) => {
                assert_eq!(out.status, MilpStatus::Optimal, "seed {seed}");
                let got = out.objective_value.unwrap();
                assert!((got - obj).abs() <= 1e-6, "seed {seed}: {got} vs {obj}");
                let x = out.incumbent.unwrap();
                assert!(model.max_violation(&x) <= 1e-6, "seed {seed}");
                assert!(model.max_integrality_violation(&x) <= 1e-6, "seed {seed}");
            }
        }
    }
}

#[test]
fn polished_search_matches_enumeration() {
    let opts = SolverOptions {
        polish_class: Some(0),
        polish_nodes: 50,
        ..SolverOptions::default()
    };
    for seed in 300..400 {
        let model = common::random_model(seed, 10, 6);
        let oracle = common::brute_force(&model);
        let out = solve_milp(&model, &opts).unwrap();
        match oracle {
            None => assert_eq!(out.status, MilpStatus::Infeasible, "seed {seed}"),
            Some((obj, _)) => {
                assert_eq!(out.status, MilpStatus::Optimal, "seed {seed}");
                assert!(
                    (out.objective_value.unwrap() - obj).abs() <= 1e-6,
                    "seed {seed}"
                );
            }
        }
    }
}

#[test]
fn node_limit_keeps_a_valid_bound() {
    let opts = SolverOptions {
        node_limit: 2,
        ..SolverOptions::default()
    };
    for seed in 400..500 {
        let model = common::random_model(seed, 12, 4);
        let Some((obj, _)) = common::brute_force(&model) else {
            continue;
        };
        let out = solve_milp(&model, &opts).unwrap();
        assert!(out.best_bound <= obj + 1e-6, "seed {seed}");
        if let Some(x) = &out.incumbent {
            assert!(model.max_violation(x) <= 1e-6, "seed {seed}");
            assert!(model.max_integrality_violation(x) <= 1e-6, "seed {seed}");
            assert!(out.objective_value.unwrap() >= obj - 1e-6, "seed {seed}");
        }
        if out.status == MilpStatus::Optimal {
            assert!(
                (out.objective_value.unwrap() - obj).abs() <= 1e-6,
                "seed {seed}"
            );
        }
    }
}
