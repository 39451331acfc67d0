//! Best-bound branch-and-bound over the LP relaxation.
//!
//! A single working tableau is shared by all nodes. Nodes differ only in
//! the bounds of binary columns, and reduced costs do not depend on bounds,
//! so the basis left behind by any previous node is dual feasible for the
//! next one and the dual simplex restarts from it directly.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{LpError, ModelError};
use crate::lp::{DualResult, LpProblem, LpStatus, LpTolerances, Revised};
use crate::milp::model::MilpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branching {
    MostFractional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeSelection {
    BestBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub integrality_tol: f64,
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub node_limit: u64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub branching: Branching,
    pub node_selection: NodeSelection,
    pub lp: LpTolerances,
    /// The rounding heuristic runs at the root and every this many nodes.
    pub heuristic_interval: u64,
    /// The diving heuristic runs at the root and every this many nodes
    /// (0 keeps it to the root).
    #[serde(default = "default_dive_interval")]
    pub dive_interval: u64,
    /// Whenever the incumbent improves, fix the binaries of this priority
    /// class to their incumbent values and search the rest of the tree
    /// below that fixing with a budget of `polish_nodes` nodes.
    #[serde(default)]
    pub polish_class: Option<u8>,
    #[serde(default = "default_polish_nodes")]
    pub polish_nodes: u64,
}

fn default_polish_nodes() -> u64 {
    POLISH_NODES
}

const POLISH_NODES: u64 = 5_000;

fn default_dive_interval() -> u64 {
    DIVE_INTERVAL
}

const DIVE_INTERVAL: u64 = 100;

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            integrality_tol: 1e-6,
            rel_gap: 1e-6,
            abs_gap: 1e-9,
            node_limit: 1_000_000,
            time_limit: None,
            branching: Branching::MostFractional,
            node_selection: NodeSelection::BestBound,
            lp: LpTolerances::default(),
            heuristic_interval: 1,
            dive_interval: DIVE_INTERVAL,
            polish_class: None,
            polish_nodes: POLISH_NODES,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), ModelError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.integrality_tol)
            || !positive(self.rel_gap)
            || !positive(self.abs_gap)
            || self.node_limit == 0
            || self.time_limit.is_some_and(|t| t.is_nan() || t <= 0.0)
        {
            return Err(ModelError::NonFinite(
                "solver options: tolerances and limits must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Absolute slack under which an objective counts as no improvement.
    pub fn gap_allowance(&self, incumbent: f64) -> f64 {
        self.abs_gap.max(self.rel_gap * incumbent.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    pub incumbent: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    pub best_bound: f64,
    pub nodes_explored: u64,
    /// Seconds.
    pub solve_time: f64,
    /// Whether the final incumbent is the externally supplied warm start.
    pub incumbent_from_warm_start: bool,
}

impl MilpOutcome {
    pub fn has_incumbent(&self) -> bool {
        self.incumbent.is_some()
    }
}

/// Solves `model` with default plumbing (no warm start, no log).
pub fn solve_milp(model: &MilpModel, opts: &SolverOptions) -> Result<MilpOutcome, ModelError> {
    BranchAndBound::new(model, opts).solve()
}

struct Node {
    bound: f64,
    seq: u64,
    fixings: Vec<(u32, bool)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: invert so the smallest (bound, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

enum NodeLp {
    Optimal(f64, Vec<f64>),
    Infeasible,
    Cutoff,
}

/// Configurable branch-and-bound run.
pub struct BranchAndBound<'a> {
    model: &'a MilpModel,
    opts: &'a SolverOptions,
    warm_start: Option<&'a [f64]>,
    log: Option<&'a mut dyn Write>,
}

impl<'a> BranchAndBound<'a> {
    pub fn new(model: &'a MilpModel, opts: &'a SolverOptions) -> Self {
        Self {
            model,
            opts,
            warm_start: None,
            log: None,
        }
    }

    /// Seeds the incumbent with a feasible assignment (ignored if it fails
    /// the feasibility or integrality check).
    pub fn warm_start(mut self, x: &'a [f64]) -> Self {
        self.warm_start = Some(x);
        self
    }

    /// Streams one plain-text line per node event.
    pub fn log_to(mut self, w: &'a mut dyn Write) -> Self {
        self.log = Some(w);
        self
    }

    pub fn solve(self) -> Result<MilpOutcome, ModelError> {
        let start = Instant::now();
        self.opts.validate()?;
        let lp = self.model.relax();
        lp.validate()?;
        let mut run = Run {
            model: self.model,
            opts: self.opts,
            lp,
            bins: self.model.binary_indices(),
            tab: None,
            incumbent: None,
            from_warm: false,
            polished: HashSet::new(),
            polish_nodes: 0,
            log: self.log,
            start,
        };
        if let Some(ws) = self.warm_start {
            run.accept_warm_start(ws)?;
        }
        run.execute()
    }
}

struct Run<'a> {
    model: &'a MilpModel,
    opts: &'a SolverOptions,
    lp: LpProblem,
    bins: Vec<usize>,
    tab: Option<Revised>,
    incumbent: Option<(f64, Vec<f64>)>,
    from_warm: bool,
    polished: HashSet<Vec<bool>>,
    polish_nodes: u64,
    log: Option<&'a mut dyn Write>,
    start: Instant,
}

const VERIFY_TOL: f64 = 1e-6;

impl Run<'_> {
    fn accept_warm_start(&mut self, ws: &[f64]) -> Result<(), ModelError> {
        if ws.len() != self.model.num_vars() {
            return Err(ModelError::WarmStartLength {
                expected: self.model.num_vars(),
                found: ws.len(),
            });
        }
        let mut x = ws.to_vec();
        if self.model.max_integrality_violation(&x) > self.opts.integrality_tol {
            return Ok(());
        }
        for &j in &self.bins {
            x[j] = x[j].round();
        }
        if self.model.max_violation(&x) <= VERIFY_TOL {
            let obj = self.model.objective_value(&x);
            self.incumbent = Some((obj, x));
            self.from_warm = true;
        }
        Ok(())
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((v, _)) => v - self.opts.gap_allowance(*v),
            None => f64::INFINITY,
        }
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn log_line(&mut self, line: std::fmt::Arguments<'_>) {
        if let Some(w) = self.log.as_mut() {
            let _ = writeln!(w, "{line}");
        }
    }

    fn apply_fixings(&mut self, fixings: &[(u32, bool)]) {
        let tab = self.tab.as_mut().expect("tableau initialised");
        for &j in &self.bins {
            let (lo, hi) = self.lp.var_bounds[j];
            tab.set_bounds(j, lo, hi);
        }
        for &(j, v) in fixings {
            let val = if v { 1.0 } else { 0.0 };
            tab.set_bounds(j as usize, val, val);
        }
        tab.recompute_beta();
    }

    /// Solves the LP from scratch with the working bounds of the current
    /// tableau and replaces the tableau.
    fn rebuild(&mut self) -> Result<LpStatus, ModelError> {
        let mut lp = self.lp.clone();
        if let Some(tab) = &self.tab {
            for (j, b) in lp.var_bounds.iter_mut().enumerate() {
                *b = tab.bounds(j);
            }
        }
        let mut tab = Revised::new(&lp, self.opts.lp);
        let status = tab.solve_primal()?;
        self.tab = Some(tab);
        Ok(status)
    }

    fn solve_node_lp(&mut self) -> Result<NodeLp, ModelError> {
        let cutoff = self.cutoff();
        let tab = self.tab.as_mut().expect("tableau initialised");
        let result = tab.solve_dual(cutoff);
        let status = match result {
            Some(DualResult::Infeasible) => return Ok(NodeLp::Infeasible),
            Some(DualResult::Cutoff) => return Ok(NodeLp::Cutoff),
            Some(DualResult::Optimal) => {
                let x = tab.solution();
                if tab.max_violation(&x) <= VERIFY_TOL {
                    LpStatus::Optimal
                } else {
                    self.rebuild()?
                }
            }
            None => self.rebuild()?,
        };
        match status {
            LpStatus::Infeasible => Ok(NodeLp::Infeasible),
            LpStatus::Unbounded => Err(LpError::Numerical(
                "node relaxation unbounded below a bounded root".into(),
            )
            .into()),
            LpStatus::Optimal => {
                let tab = self.tab.as_ref().expect("tableau initialised");
                let x = tab.solution();
                let obj = tab.objective();
                if obj >= cutoff {
                    Ok(NodeLp::Cutoff)
                } else {
                    Ok(NodeLp::Optimal(obj, x))
                }
            }
        }
    }

    /// Fixes every binary to its rounded value and solves the residual LP.
    fn try_rounded(&mut self, x: &[f64]) -> Result<Option<(f64, Vec<f64>)>, ModelError> {
        let fixings: Vec<(u32, bool)> =
            self.bins.iter().map(|&j| (j as u32, x[j] >= 0.5)).collect();
        // direct check first: continuous part may already fit
        let mut direct = x.to_vec();
        for &(j, v) in &fixings {
            direct[j as usize] = if v { 1.0 } else { 0.0 };
        }
        if self.model.max_violation(&direct) <= self.opts.lp.feasibility {
            let obj = self.model.objective_value(&direct);
            return Ok(Some((obj, direct)));
        }
        self.apply_fixings(&fixings);
        match self.solve_node_lp()? {
            NodeLp::Optimal(_, mut sol) => {
                for &(j, v) in &fixings {
                    sol[j as usize] = if v { 1.0 } else { 0.0 };
                }
                if self.model.max_violation(&sol) <= VERIFY_TOL {
                    let obj = self.model.objective_value(&sol);
                    Ok(Some((obj, sol)))
                } else {
                    Ok(None)
                }
            }
            _ => Ok(None),
        }
    }

    fn offer(&mut self, obj: f64, x: Vec<f64>) -> bool {
        if obj < self.cutoff() {
            self.incumbent = Some((obj, x));
            self.from_warm = false;
            true
        } else {
            false
        }
    }

    /// Fractional binaries of the highest priority class present, as
    /// `(index, distance to nearest integer)`.
    fn fractional_class(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let vars = self.model.vars();
        let mut class: Option<u8> = None;
        let mut out = Vec::new();
        for &j in &self.bins {
            let frac = (x[j] - x[j].round()).abs();
            if frac <= self.opts.integrality_tol {
                continue;
            }
            let p = vars[j].priority;
            if class.is_none_or(|c| p > c) {
                class = Some(p);
                out.clear();
            }
            if class == Some(p) {
                out.push((j, frac));
            }
        }
        out
    }

    /// Most fractional binary within the highest priority class, ties by
    /// lowest index.
    fn most_fractional(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (j, frac) in self.fractional_class(x) {
            if best.is_none_or(|(_, f)| frac > f) {
                best = Some((j, frac));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Integral LP point turned into a candidate incumbent.
    fn integral_candidate(
        &mut self,
        obj: f64,
        x: Vec<f64>,
    ) -> Result<Option<(f64, Vec<f64>)>, ModelError> {
        if self.model.max_integrality_violation(&x) == 0.0 {
            Ok(Some((obj, x)))
        } else {
            self.try_rounded(&x)
        }
    }

    /// Repeatedly fixes the least fractional binary of the highest class to
    /// its nearer value (the other value if that is infeasible) and
    /// re-solves, until the LP point is integral or both values fail.
    fn dive(
        &mut self,
        base: &[(u32, bool)],
        obj: f64,
        x: &[f64],
    ) -> Result<Option<(f64, Vec<f64>)>, ModelError> {
        let mut fixings = base.to_vec();
        let (mut obj, mut x) = (obj, x.to_vec());
        for _ in 0..self.bins.len() {
            let mut pick: Option<(usize, f64)> = None;
            for (j, frac) in self.fractional_class(&x) {
                if pick.is_none_or(|(_, f)| frac < f) {
                    pick = Some((j, frac));
                }
            }
            let Some((j, _)) = pick else {
                return self.integral_candidate(obj, x);
            };
            let near = x[j] >= 0.5;
            let mut next = None;
            for v in [near, !near] {
                fixings.push((j as u32, v));
                self.apply_fixings(&fixings);
                if let NodeLp::Optimal(o, nx) = self.solve_node_lp()? {
                    next = Some((o, nx));
                    break;
                }
                fixings.pop();
            }
            match next {
                Some((o, nx)) => (obj, x) = (o, nx),
                None => return Ok(None),
            }
        }
        Ok(None)
    }

    fn out_of_time(&self) -> bool {
        self.opts.time_limit.is_some_and(|t| self.elapsed() >= t)
    }

    /// Best-bound search below the incumbent's values of the polish class.
    /// Returns whether the incumbent improved.
    fn polish(&mut self) -> Result<bool, ModelError> {
        let Some(class) = self.opts.polish_class else {
            return Ok(false);
        };
        let Some((_, x)) = &self.incumbent else {
            return Ok(false);
        };
        let vars = self.model.vars();
        let fixings: Vec<(u32, bool)> = self
            .bins
            .iter()
            .filter(|&&j| vars[j].priority == class)
            .map(|&j| (j as u32, x[j] >= 0.5))
            .collect();
        if fixings.is_empty() || !self.polished.insert(fixings.iter().map(|f| f.1).collect()) {
            return Ok(false);
        }
        let mut improved = false;
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Node {
            bound: f64::NEG_INFINITY,
            seq,
            fixings,
        });
        let mut used = 0u64;
        while let Some(node) = heap.pop() {
            if node.bound >= self.cutoff() || used >= self.opts.polish_nodes || self.out_of_time() {
                break;
            }
            used += 1;
            self.apply_fixings(&node.fixings);
            let NodeLp::Optimal(obj, x) = self.solve_node_lp()? else {
                continue;
            };
            match self.most_fractional(&x) {
                None => {
                    if let Some((v, sol)) = self.integral_candidate(obj, x)? {
                        improved |= self.offer(v, sol);
                    }
                }
                Some(j) => {
                    for v in [false, true] {
                        let mut fixings = node.fixings.clone();
                        fixings.push((j as u32, v));
                        seq += 1;
                        heap.push(Node {
                            bound: obj,
                            seq,
                            fixings,
                        });
                    }
                }
            }
        }
        self.polish_nodes += used;
        Ok(improved)
    }

    fn finish(&self, status: MilpStatus, best_bound: f64, nodes: u64) -> MilpOutcome {
        let (objective_value, incumbent) = match &self.incumbent {
            Some((v, x)) => (Some(*v), Some(x.clone())),
            None => (None, None),
        };
        let best_bound = match (status, objective_value) {
            (MilpStatus::Optimal, Some(v)) => best_bound.min(v),
            _ => best_bound,
        };
        MilpOutcome {
            status,
            incumbent,
            objective_value,
            best_bound,
            nodes_explored: nodes + self.polish_nodes,
            solve_time: self.elapsed(),
            incumbent_from_warm_start: self.from_warm && self.incumbent.is_some(),
        }
    }

    fn execute(mut self) -> Result<MilpOutcome, ModelError> {
        let mut tab = Revised::new(&self.lp, self.opts.lp);
        let root = tab.solve_primal()?;
        self.tab = Some(tab);
        match root {
            LpStatus::Infeasible => {
                self.log_line(format_args!("node=0 event=root-infeasible"));
                return Ok(self.finish(MilpStatus::Infeasible, f64::INFINITY, 1));
            }
            LpStatus::Unbounded => {
                self.log_line(format_args!("node=0 event=root-unbounded"));
                return Ok(self.finish(MilpStatus::Unbounded, f64::NEG_INFINITY, 1));
            }
            LpStatus::Optimal => {}
        }
        let root_obj = self.tab.as_ref().map(|t| t.objective()).unwrap_or(0.0);
        if self.polish()? {
            self.log_line(format_args!("node=0 event=polish"));
        }

        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Node {
            bound: root_obj,
            seq,
            fixings: Vec::new(),
        });
        let mut nodes = 0u64;
        let mut global_bound = root_obj;

        loop {
            let Some(top) = heap.peek() else {
                let status = if self.incumbent.is_some() {
                    MilpStatus::Optimal
                } else {
                    MilpStatus::Infeasible
                };
                let bound = self
                    .incumbent
                    .as_ref()
                    .map(|(v, _)| *v)
                    .unwrap_or(f64::INFINITY);
                self.log_line(format_args!(
                    "node={nodes} bound={} event=exhausted",
                    fmt_num(bound)
                ));
                return Ok(self.finish(status, bound, nodes));
            };
            global_bound = global_bound.max(top.bound);
            if let Some((inc, _)) = &self.incumbent {
                if inc - global_bound <= self.opts.gap_allowance(*inc) {
                    self.log_line(format_args!(
                        "node={nodes} bound={} incumbent={} event=gap-closed",
                        fmt_num(global_bound),
                        fmt_num(*inc)
                    ));
                    return Ok(self.finish(MilpStatus::Optimal, global_bound, nodes));
                }
            }
            if nodes >= self.opts.node_limit || self.out_of_time() {
                self.log_line(format_args!(
                    "node={nodes} bound={} event=limit",
                    fmt_num(global_bound)
                ));
                return Ok(self.finish(MilpStatus::LimitReached, global_bound, nodes));
            }
            let node = heap.pop().expect("peeked");
            nodes += 1;

            self.apply_fixings(&node.fixings);
            let lp = self.solve_node_lp()?;
            let inc_txt = self.incumbent.as_ref().map(|(v, _)| fmt_num(*v));
            let inc_txt = inc_txt.as_deref().unwrap_or("none");
            let (obj, x) = match lp {
                NodeLp::Infeasible => {
                    self.log_line(format_args!(
                        "node={nodes} depth={} bound={} incumbent={inc_txt} open={} event=infeasible",
                        node.fixings.len(),
                        fmt_num(global_bound),
                        heap.len()
                    ));
                    continue;
                }
                NodeLp::Cutoff => {
                    self.log_line(format_args!(
                        "node={nodes} depth={} bound={} incumbent={inc_txt} open={} event=pruned",
                        node.fixings.len(),
                        fmt_num(global_bound),
                        heap.len()
                    ));
                    continue;
                }
                NodeLp::Optimal(obj, x) => (obj, x),
            };

            match self.most_fractional(&x) {
                None => {
                    let candidate = self.integral_candidate(obj, x)?;
                    let improved = match candidate {
                        Some((v, sol)) => self.offer(v, sol),
                        None => false,
                    };
                    if improved {
                        self.polish()?;
                    }
                    self.log_line(format_args!(
                        "node={nodes} depth={} bound={} lp={} incumbent={} open={} event={}",
                        node.fixings.len(),
                        fmt_num(global_bound),
                        fmt_num(obj),
                        self.incumbent
                            .as_ref()
                            .map(|(v, _)| fmt_num(*v))
                            .unwrap_or_else(|| "none".into()),
                        heap.len(),
                        if improved { "incumbent" } else { "integral" }
                    ));
                }
                Some(j) => {
                    let bound = obj.max(node.bound);
                    for v in [false, true] {
                        let mut fixings = Vec::with_capacity(node.fixings.len() + 1);
                        fixings.extend_from_slice(&node.fixings);
                        fixings.push((j as u32, v));
                        seq += 1;
                        heap.push(Node {
                            bound,
                            seq,
                            fixings,
                        });
                    }
                    let run_heuristic = nodes == 1
                        || (self.opts.heuristic_interval > 0
                            && nodes.is_multiple_of(self.opts.heuristic_interval));
                    let mut improved = false;
                    if run_heuristic {
                        if let Some((v, sol)) = self.try_rounded(&x)? {
                            improved = self.offer(v, sol);
                        }
                    }
                    let run_dive = nodes == 1
                        || (self.opts.dive_interval > 0
                            && nodes.is_multiple_of(self.opts.dive_interval));
                    if run_dive {
                        if let Some((v, sol)) = self.dive(&node.fixings, obj, &x)? {
                            improved |= self.offer(v, sol);
                        }
                    }
                    if improved {
                        self.polish()?;
                    }
                    self.log_line(format_args!(
                        "node={nodes} depth={} bound={} lp={} incumbent={} open={} event={}",
                        node.fixings.len(),
                        fmt_num(global_bound),
                        fmt_num(obj),
                        self.incumbent
                            .as_ref()
                            .map(|(v, _)| fmt_num(*v))
                            .unwrap_or_else(|| "none".into()),
                        heap.len(),
                        if improved {
                            "branch+heuristic"
                        } else {
                            "branch"
                        }
                    ));
                }
            }
        }
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9}")
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;
    use crate::milp::model::VarSpec;

    fn knapsack() -> MilpModel {
        // maximise 5a + 4b + 3c s.t. 2a + 3b + c <= 4
        let mut m = MilpModel::new();
        let a = m.add_var(VarSpec::binary("a")).unwrap();
        let b = m.add_var(VarSpec::binary("b")).unwrap();
        let c = m.add_var(VarSpec::binary("c")).unwrap();
        m.set_objective_coeff(a, -5.0).unwrap();
        m.set_objective_coeff(b, -4.0).unwrap();
        m.set_objective_coeff(c, -3.0).unwrap();
        m.add_constraint(&[(a, 2.0), (b, 3.0), (c, 1.0)], Relation::Le, 4.0)
            .unwrap();
        m
    }

    #[test]
    fn knapsack_optimum() {
        let out = solve_milp(&knapsack(), &SolverOptions::default()).unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.objective_value.unwrap() + 8.0).abs() < 1e-9);
        let x = out.incumbent.unwrap();
        assert_eq!(
            x.iter().map(|v| v.round() as i32).collect::<Vec<_>>(),
            vec![1, 0, 1]
        );
    }

    #[test]
    fn half_integral_equality_is_infeasible() {
        let mut m = MilpModel::new();
        let x = m.add_var(VarSpec::binary("x")).unwrap();
        m.add_constraint(&[(x, 1.0)], Relation::Eq, 0.5).unwrap();
        let out = solve_milp(&m, &SolverOptions::default()).unwrap();
        assert_eq!(out.status, MilpStatus::Infeasible);
        assert!(out.incumbent.is_none());
    }

    #[test]
    fn node_limit_returns_best_incumbent() {
        let opts = SolverOptions {
            node_limit: 1,
            heuristic_interval: 0,
            ..SolverOptions::default()
        };
        let out = solve_milp(&knapsack(), &opts).unwrap();
        assert!(matches!(
            out.status,
            MilpStatus::LimitReached | MilpStatus::Optimal
        ));
        assert!(out.nodes_explored <= 1);
    }

    #[test]
    fn warm_start_seeds_incumbent() {
        let m = knapsack();
        let ws = [1.0, 0.0, 1.0];
        let opts = SolverOptions::default();
        let out = BranchAndBound::new(&m, &opts)
            .warm_start(&ws)
            .solve()
            .unwrap();
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!(out.incumbent_from_warm_start);
        assert!((out.objective_value.unwrap() + 8.0).abs() < 1e-12);

        // an infeasible seed is ignored
        let bad = [1.0, 1.0, 1.0];
        let out = BranchAndBound::new(&m, &opts)
            .warm_start(&bad)
            .solve()
            .unwrap();
        assert!(!out.incumbent_from_warm_start);
        assert!((out.objective_value.unwrap() + 8.0).abs() < 1e-9);

        let short = [1.0];
        assert!(BranchAndBound::new(&m, &opts)
            .warm_start(&short)
            .solve()
            .is_err());
    }

    #[test]
    fn rejects_bad_options() {
        let opts = SolverOptions {
            rel_gap: -1.0,
            ..SolverOptions::default()
        };
        assert!(solve_milp(&knapsack(), &opts).is_err());
    }
}
