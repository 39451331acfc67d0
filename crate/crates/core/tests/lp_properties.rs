use clustermpc::lp::{solve_lp, LpProblem, LpStatus, LpTolerances, Relation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Minimum over all basic feasible points of a boxed LP, found by solving
/// every square subsystem of active constraints and bounds.
fn vertex_oracle(lp: &LpProblem) -> Option<f64> {
    let n = lp.num_vars;
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for row in &lp.constraints {
        planes.push((row.coeffs.clone(), row.rhs));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.var_bounds[j].0));
        planes.push((e, lp.var_bounds[j].1));
    }
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn rec(
        k: usize,
        start: usize,
        pick: &mut Vec<usize>,
        planes: &[(Vec<f64>, f64)],
        lp: &LpProblem,
        best: &mut Option<f64>,
    ) {
        let n = lp.num_vars;
        if k == n {
            let a = DMatrix::from_fn(n, n, |r, c| planes[pick[r]].0[c]);
            let b = DVector::from_fn(n, |r, _| planes[pick[r]].1);
            let lu = a.clone().lu();
            if a.determinant().abs() < 1e-9 {
                return;
            }
            let Some(x) = lu.solve(&b) else { return };
            let x: Vec<f64> = x.iter().copied().collect();
            if lp.max_violation(&x) <= 1e-7 {
                let v = lp.objective_at(&x);
                if best.is_none_or(|b| v < b) {
                    *best = Some(v);
                }
            }
            return;
        }
        for i in start..planes.len() {
            pick[k] = i;
            rec(k + 1, i + 1, pick, planes, lp, best);
        }
    }
    rec(0, 0, &mut pick, &planes, lp, &mut best);
    best
}

fn lp_strategy() -> impl Strategy<Value = LpProblem> {
    (1usize..=6, 0usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5i32..=5, n),
            prop::collection::vec((prop::collection::vec(-4i32..=4, n), 0u8..3, -6i32..=6), m),
            prop::collection::vec((-4i32..=0, 0i32..=4), n),
        )
            .prop_map(move |(c, rows, bounds)| {
                let mut lp = LpProblem::new(n);
                lp.objective = c.iter().map(|&v| v as f64).collect();
                lp.var_bounds = bounds.iter().map(|&(l, h)| (l as f64, h as f64)).collect();
                for (a, rel, rhs) in rows {
                    let rel = match rel {
                        0 => Relation::Le,
                        1 => Relation::Ge,
                        _ => Relation::Eq,
                    };
                    lp.add_constraint(a.iter().map(|&v| v as f64).collect(), rel, rhs as f64);
                }
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn boxed_lps_match_vertex_enumeration(lp in lp_strategy()) {
        let out = solve_lp(&lp, &LpTolerances::default()).unwrap();
        match vertex_oracle(&lp) {
            None => prop_assert_eq!(out.status, LpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(out.status, LpStatus::Optimal);
                let got = out.objective_value.unwrap();
                prop_assert!((got - v).abs() <= 1e-6, "{} vs {}", got, v);
                let x = out.solution.unwrap();
                prop_assert!(lp.max_violation(&x) <= 1e-6);
                prop_assert!((lp.objective_at(&x) - got).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn repeated_solves_are_bitwise_identical(lp in lp_strategy()) {
        let tol = LpTolerances::default();
        let a = solve_lp(&lp, &tol).unwrap();
        let b = solve_lp(&lp, &tol).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.iterations, b.iterations);
        let bits = |v: &Option<Vec<f64>>| v.as_ref().map(|x| x.iter().map(|f| f.to_bits()).collect::<Vec<_>>());
        prop_assert_eq!(bits(&a.solution), bits(&b.solution));
    }

    #[test]
    fn offset_shifts_the_optimum(lp in lp_strategy(), shift in -10.0f64..10.0) {
        let tol = LpTolerances::default();
        let base = solve_lp(&lp, &tol).unwrap();
        let mut moved = lp.clone();
        moved.objective_offset = shift;
        let out = solve_lp(&moved, &tol).unwrap();
        prop_assert_eq!(base.status, out.status);
        if let (Some(a), Some(b)) = (base.objective_value, out.objective_value) {
            prop_assert!((b - a - shift).abs() <= 1e-9);
        }
    }
}

#[test]
fn free_variable_unbounded_direction() {
    let mut lp = LpProblem::new(2);
    lp.objective = vec![1.0, -1.0];
    lp.var_bounds[0] = (0.0, 1.0);
    lp.add_constraint(vec![1.0, -1.0], Relation::Le, 3.0);
    let out = solve_lp(&lp, &LpTolerances::default()).unwrap();
    assert_eq!(out.status, LpStatus::Unbounded);
}

#[test]
fn degenerate_cycling_example_terminates() {
    let mut lp = LpProblem::new(4);
    lp.objective = vec![-0.75, 150.0, -0.02, 6.0];
    lp.var_bounds = vec![(0.0, f64::INFINITY); 4];
    lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
    lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
    lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
    let out = solve_lp(&lp, &LpTolerances::default()).unwrap();
    assert_eq!(out.status, LpStatus::Optimal);
    assert!((out.objective_value.unwrap() + 0.05).abs() < 1e-9);
}
