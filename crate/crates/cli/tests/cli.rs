use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clustermpc::io::{load_scenario, read_trace};
use clustermpc::lp::{solve_lp, LpProblem, LpStatus, LpTolerances, Relation};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clustermpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

const SMALL: &str = r#"{
  "name": "small",
  "workspace": [0.0, 0.0, 12.0, 10.0],
  "obstacles": [[3.0, 3.5, 4.0, 6.5], [6.0, 2.0, 7.0, 4.5], [6.0, 5.5, 7.0, 8.0]],
  "terminal_box": {"lo": [10.5, -0.005, 4.5, -0.005], "hi": [11.5, 0.005, 5.5, 0.005]},
  "x0": [0.5, 0.0, 5.0, 0.0],
  "Ts": 1.0,
  "Ns": 12,
  "gamma": 1.0,
  "v_max": 2.0,
  "a_max": 1.0,
  "Nc": 2
}"#;

fn small(dir: &Path) -> PathBuf {
    let p = dir.join("small.json");
    fs::write(&p, SMALL).unwrap();
    p
}

/// Obstacle-free optimum: the cheapest over arrival steps `j` of
/// `j + γ·min Σ‖u‖₁` subject to the dynamics, bounds and terminal box at `j`.
fn free_space_optimum(path: &Path) -> f64 {
    let file = load_scenario(&fs::read_to_string(path).unwrap()).unwrap();
    let scn = &file.scenario;
    let (a, b) = (&scn.dynamics.a, &scn.dynamics.b);
    let mut best = f64::INFINITY;
    for j in 1..=scn.ns + 1 {
        let nx = 4 * j;
        let nu = 2 * j;
        let n = nx + 2 * nu;
        let x = |k: usize, c: usize| 4 * (k - 1) + c;
        let u = |k: usize, c: usize| nx + 2 * k + c;
        let s = |k: usize, c: usize| nx + nu + 2 * k + c;
        let mut lp = LpProblem::new(n);
        for k in 1..=j {
            let ws = scn.workspace;
            lp.var_bounds[x(k, 0)] = (ws.x_min, ws.x_max);
            lp.var_bounds[x(k, 2)] = (ws.y_min, ws.y_max);
            lp.var_bounds[x(k, 1)] = (-scn.v_max, scn.v_max);
            lp.var_bounds[x(k, 3)] = (-scn.v_max, scn.v_max);
        }
        for c in 0..4 {
            let (lo, hi) = lp.var_bounds[x(j, c)];
            lp.var_bounds[x(j, c)] = (lo.max(scn.terminal.lo[c]), hi.min(scn.terminal.hi[c]));
        }
        for k in 0..j {
            for c in 0..2 {
                lp.var_bounds[u(k, c)] = (-scn.a_max, scn.a_max);
                lp.var_bounds[s(k, c)] = (0.0, f64::INFINITY);
                lp.objective[s(k, c)] = scn.gamma;
                let mut row = vec![0.0; n];
                row[s(k, c)] = 1.0;
                row[u(k, c)] = -1.0;
                lp.add_constraint(row.clone(), Relation::Ge, 0.0);
                row[u(k, c)] = 1.0;
                lp.add_constraint(row, Relation::Ge, 0.0);
            }
            for r in 0..4 {
                let mut row = vec![0.0; n];
                let mut rhs = 0.0;
                row[x(k + 1, r)] = 1.0;
                for c in 0..4 {
                    if k == 0 {
                        rhs += a[(r, c)] * file.x0[c];
                    } else {
                        row[x(k, c)] -= a[(r, c)];
                    }
                }
                for c in 0..2 {
                    row[u(k, c)] -= b[(r, c)];
                }
                lp.add_constraint(row, Relation::Eq, rhs);
            }
        }
        let out = solve_lp(&lp, &LpTolerances::default()).unwrap();
        if out.status == LpStatus::Optimal {
            best = best.min(j as f64 + out.objective_value.unwrap());
        }
    }
    best
}

#[test]
fn solve_matches_the_free_space_oracle() {
    let path = scenario("desk_empty.json");
    let o = run(&["solve", path.to_str().unwrap(), "--unclustered"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert_eq!(field(&text, "status"), "Optimal");
    let j: f64 = field(&text, "J_star").parse().unwrap();
    let oracle = free_space_optimum(&path);
    assert!((j - oracle).abs() < 1e-6, "{j} vs {oracle}");
    assert!((j - 17.9703125).abs() < 1e-6);
}

#[test]
fn solve_from_inside_the_terminal_box() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(SMALL).unwrap();
    doc["x0"] = serde_json::json!([11.0, 0.0, 5.0, 0.0]);
    let p = dir.path().join("at_target.json");
    fs::write(&p, doc.to_string()).unwrap();
    let plan = dir.path().join("plan.json");
    let o = run(&[
        "solve",
        p.to_str().unwrap(),
        "--clusters",
        "2",
        "--report-out",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!((field(&text, "J_star").parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(field(&text, "arrival_step"), "1");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(plan).unwrap()).unwrap();
    assert_eq!(json["arrival_step"], 1);
}

#[test]
fn solve_reports_binary_counts() {
    let path = scenario("synthetic45.json");
    let o = run(&[
        "solve",
        path.to_str().unwrap(),
        "--clusters",
        "2",
        "--node-limit",
        "1",
    ]);
    let text = stdout(&o);
    let ns: usize = load_scenario(&fs::read_to_string(&path).unwrap())
        .unwrap()
        .scenario
        .ns;
    let expected = (4 * (ns + 1) + 45) * 2;
    assert_eq!(field(&text, "avoidance_binaries"), expected.to_string());
}

#[test]
fn missing_scenario_is_bad_input() {
    let o = run(&["solve", "/nonexistent/scenario.json", "--unclustered"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn mode_is_required_and_exclusive() {
    let path = scenario("desk.json");
    assert_eq!(
        run(&["solve", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&[
            "solve",
            path.to_str().unwrap(),
            "--unclustered",
            "--clusters",
            "2"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", path.to_str().unwrap(), "--clusters", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn infeasible_and_limited_solves_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(SMALL).unwrap();
    doc["Ns"] = serde_json::json!(2);
    let p = dir.path().join("short.json");
    fs::write(&p, doc.to_string()).unwrap();
    assert_eq!(
        run(&["solve", p.to_str().unwrap(), "--unclustered"])
            .status
            .code(),
        Some(2)
    );

    let p = small(dir.path());
    let o = run(&[
        "solve",
        p.to_str().unwrap(),
        "--clusters",
        "2",
        "--node-limit",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert_eq!(field(&stdout(&o), "status"), "LimitReached");
}

#[test]
fn simulate_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = small(dir.path());
    let csv = dir.path().join("trace.csv");
    let json = dir.path().join("trace.json");
    let svg = dir.path().join("run.svg");
    let o = run(&[
        "simulate",
        p.to_str().unwrap(),
        "--clusters",
        "2",
        "--node-limit",
        "2000",
        "--trace-out",
        csv.to_str().unwrap(),
        "--trace-json-out",
        json.to_str().unwrap(),
        "--svg-out",
        svg.to_str().unwrap(),
        "--snapshot-step",
        "0",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("termination=reached-target"));
    let rows = read_trace(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert!(!rows.is_empty());
    let picture = fs::read_to_string(&svg).unwrap();
    assert_eq!(picture.matches(r#"id="cluster-"#).count(), 2);
    assert_eq!(picture.matches(r#"id="state-"#).count(), rows.len() + 1);

    let again = dir.path().join("again.svg");
    let o = run(&[
        "render",
        p.to_str().unwrap(),
        "--trace",
        json.to_str().unwrap(),
        "--snapshot-step",
        "0",
        "--svg-out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&again).unwrap(), picture);

    let o = run(&[
        "render",
        p.to_str().unwrap(),
        "--trace",
        json.to_str().unwrap(),
        "--snapshot-step",
        &rows.len().to_string(),
        "--svg-out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_without_steps_fails_with_an_empty_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p = small(dir.path());
    let csv = dir.path().join("trace.csv");
    let o = run(&[
        "simulate",
        p.to_str().unwrap(),
        "--unclustered",
        "--max-steps",
        "0",
        "--trace-out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1);
}

#[test]
fn benchmark_rows_follow_the_modes_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let p = small(dir.path());
    let bench = |out: &Path| {
        let o = run(&[
            "benchmark",
            p.to_str().unwrap(),
            "--modes",
            "unclustered",
            "--report-out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
        v
    };
    let a = bench(&dir.path().join("a.json"));
    let b = bench(&dir.path().join("b.json"));
    let rows = a["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["mode"], "unclustered");
    assert_eq!(rows[0]["reached_target"], true);
    assert_eq!(
        rows[0]["closed_loop_cost"],
        b["rows"][0]["closed_loop_cost"]
    );
    assert_eq!(rows[0]["nodes"], b["rows"][0]["nodes"]);
}

#[test]
fn seeded_fields_are_reproducible() {
    let path = scenario("desk.json");
    let solve = || {
        let o = run(&[
            "solve",
            path.to_str().unwrap(),
            "--unclustered",
            "--seed",
            "3",
            "--obstacles",
            "4",
        ]);
        stdout(&o)
    };
    let (a, b) = (solve(), solve());
    assert_eq!(field(&a, "J_star"), field(&b, "J_star"));
    assert_eq!(field(&a, "nodes"), field(&b, "nodes"));
    assert_eq!(field(&a, "avoidance_binaries"), (4 * 13 * 4).to_string());
}
