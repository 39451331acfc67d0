use std::fmt::Write as _;

use clustermpc::{Mode, SolverOptions, Trace};
use serde::Serialize;

/// One benchmarked mode.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub mode: String,
    pub clusters: Option<usize>,
    pub avoidance_binaries: usize,
    pub steps: usize,
    pub reached_target: bool,
    pub termination: String,
    pub closed_loop_cost: Option<f64>,
    pub total_solve_time: Option<f64>,
    pub nodes: Option<u64>,
    pub limited_steps: usize,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn from_trace(trace: &Trace, binaries: usize) -> Self {
        Self {
            mode: trace.mode.to_string(),
            clusters: clusters(trace.mode),
            avoidance_binaries: binaries,
            steps: trace.steps.len(),
            reached_target: trace.reached_target,
            termination: crate::termination_text(&trace.termination),
            closed_loop_cost: Some(trace.closed_loop_cost),
            total_solve_time: Some(trace.total_solve_time),
            nodes: Some(trace.total_nodes()),
            limited_steps: trace.steps.iter().filter(|s| s.limit_reached).count(),
            error: (!trace.reached_target).then(|| "target not reached".to_string()),
        }
    }

    pub fn failed(mode: Mode, binaries: usize, error: String) -> Self {
        Self {
            mode: mode.to_string(),
            clusters: clusters(mode),
            avoidance_binaries: binaries,
            steps: 0,
            reached_target: false,
            termination: "error".into(),
            closed_loop_cost: None,
            total_solve_time: None,
            nodes: None,
            limited_steps: 0,
            error: Some(error),
        }
    }
}

fn clusters(mode: Mode) -> Option<usize> {
    match mode {
        Mode::Unclustered => None,
        Mode::Clustered(n) => Some(n),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub scenario: String,
    pub options: SolverOptions,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(|r| r.error.is_none())
    }

    pub fn table(&self) -> String {
        let opt =
            |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>6} {:>12} {:>10} {:>10} {:>8}  termination",
            "mode", "binaries", "steps", "cost", "time_s", "nodes", "limited"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>9} {:>6} {:>12} {:>10} {:>10} {:>8}  {}",
                r.mode,
                r.avoidance_binaries,
                r.steps,
                opt(r.closed_loop_cost, 4),
                opt(r.total_solve_time, 3),
                r.nodes.map_or("-".to_string(), |n| n.to_string()),
                r.limited_steps,
                r.error
                    .as_deref()
                    .map_or(r.termination.clone(), |e| format!(
                        "{} ({e})",
                        r.termination
                    ))
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serialisable");
        s.push('\n');
        s
    }
}
