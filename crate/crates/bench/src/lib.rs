//! Benchmark fixtures.

use clustermpc::io::{load_scenario, ScenarioFile};
use clustermpc::lp::{LpProblem, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DESK: &str = include_str!("../../../scenarios/desk.json");
const SYNTHETIC: &str = include_str!("../../../scenarios/synthetic45.json");

pub fn desk() -> ScenarioFile {
    load_scenario(DESK).expect("bundled scenario")
}

pub fn synthetic45() -> ScenarioFile {
    load_scenario(SYNTHETIC).expect("bundled scenario")
}

/// Feasible boxed LP with `m` dense `≤` rows over `n` variables.
pub fn random_lp(seed: u64, n: usize, m: usize) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lp = LpProblem::new(n);
    lp.objective = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    lp.var_bounds = vec![(-10.0, 10.0); n];
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        lp.add_constraint(row, Relation::Le, rng.random_range(0.5..5.0));
    }
    lp
}
