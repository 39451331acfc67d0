//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every constraint row `a·x {≤,=,≥} b` is written as `a·x + s = b` with a
//! slack whose bounds encode the relation (`[0,∞)`, `[0,0]`, `(-∞,0]`).
//! Phase 1 adds one artificial column per row that the slack cannot absorb
//! at the starting point. Dantzig pricing is used until the pivot count
//! passes `bland_factor × rows`, after which Bland's rule takes over.
//!
//! Branch-and-bound uses the factorised engine in [`revised`] instead; the
//! dense tableau stays as the plain reference solver.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LpError;

mod factor;
mod revised;

pub(crate) use revised::Revised;

/// Relation of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// One dense constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimisation LP with per-variable bounds (possibly infinite).
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    /// Constant added to the reported objective value.
    pub objective_offset: f64,
    pub var_bounds: Vec<(f64, f64)>,
    pub constraints: Vec<LinearConstraint>,
}

impl LpProblem {
    /// An LP with `num_vars` free variables, zero objective and no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            objective_offset: 0.0,
            var_bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(LinearConstraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::Dimension {
                what: "objective".into(),
                expected: self.num_vars,
                found: self.objective.len(),
            });
        }
        if self.var_bounds.len() != self.num_vars {
            return Err(LpError::Dimension {
                what: "var_bounds".into(),
                expected: self.num_vars,
                found: self.var_bounds.len(),
            });
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::NonFinite(format!("objective coefficient {j}")));
        }
        if !self.objective_offset.is_finite() {
            return Err(LpError::NonFinite("objective offset".into()));
        }
        for (j, &(lo, hi)) in self.var_bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(LpError::NonFinite(format!("bounds of variable {j}")));
            }
            if lo > hi {
                return Err(LpError::InvertedBounds { var: j, lo, hi });
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(LpError::Dimension {
                    what: format!("constraint {i}"),
                    expected: self.num_vars,
                    found: row.coeffs.len(),
                });
            }
            if let Some(j) = row.coeffs.iter().position(|c| !c.is_finite()) {
                return Err(LpError::NonFinite(format!(
                    "coefficient {j} of constraint {i}"
                )));
            }
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("rhs of constraint {i}")));
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &(lo, hi)) in self.var_bounds.iter().enumerate() {
            worst = worst.max(lo - x[j]).max(x[j] - hi);
        }
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            worst = worst.max(row_violation(lhs, row.relation, row.rhs));
        }
        worst
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

pub(crate) fn row_violation(lhs: f64, relation: Relation, rhs: f64) -> f64 {
    match relation {
        Relation::Le => (lhs - rhs).max(0.0),
        Relation::Ge => (rhs - lhs).max(0.0),
        Relation::Eq => (lhs - rhs).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpTolerances {
    pub pivot: f64,
    pub feasibility: f64,
    pub reduced_cost: f64,
    /// Bland's rule activates after `bland_factor × rows` pivots.
    pub bland_factor: usize,
}

impl Default for LpTolerances {
    fn default() -> Self {
        Self {
            pivot: 1e-9,
            feasibility: 1e-7,
            reduced_cost: 1e-7,
            bland_factor: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    pub iterations: usize,
}

/// Solves `problem` from scratch with the two-phase primal simplex.
pub fn solve_lp(problem: &LpProblem, tol: &LpTolerances) -> Result<LpOutcome, LpError> {
    problem.validate()?;
    let mut tab = Tableau::new(problem, *tol);
    let status = tab.solve_primal()?;
    Ok(tab.outcome(status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable sitting at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DualResult {
    Optimal,
    Infeasible,
    Cutoff,
}

#[derive(Debug, Clone)]
struct SparseRow {
    idx: Vec<usize>,
    val: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

const DROP_TOL: f64 = 1e-14;

/// Dense simplex tableau `B⁻¹[A | I | Art | b]` plus bookkeeping.
#[derive(Debug, Clone)]
pub(crate) struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    width: usize,
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    status: Vec<VarStatus>,
    /// Values of nonbasic columns (basic entries are stale).
    x: Vec<f64>,
    basis: Vec<usize>,
    beta: Vec<f64>,
    first_artificial: usize,
    offset: f64,
    tol: LpTolerances,
    pub(crate) pivots: usize,
    pivots_this_solve: usize,
}

impl Tableau {
    pub(crate) fn new(problem: &LpProblem, tol: LpTolerances) -> Self {
        let m = problem.constraints.len();
        let n = problem.num_vars;

        let rows: Vec<SparseRow> = problem
            .constraints
            .iter()
            .map(|c| {
                let (idx, val) = c
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .unzip();
                SparseRow {
                    idx,
                    val,
                    relation: c.relation,
                    rhs: c.rhs,
                }
            })
            .collect();

        let mut lo = Vec::with_capacity(n + 2 * m);
        let mut hi = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut status = Vec::with_capacity(n + 2 * m);
        for &(l, h) in &problem.var_bounds {
            lo.push(l);
            hi.push(h);
            let (v, s) = initial_nonbasic(l, h);
            x.push(v);
            status.push(s);
        }

        // residual each slack must absorb at the starting point
        let mut residual = Vec::with_capacity(m);
        for row in &rows {
            let ax: f64 = row.idx.iter().zip(&row.val).map(|(&j, &a)| a * x[j]).sum();
            residual.push(row.rhs - ax);
        }

        let mut basis = vec![0usize; m];
        let mut sign = vec![1.0f64; m];
        let mut needs_art = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let (sl, sh) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(sl);
            hi.push(sh);
            let r = residual[i];
            if r >= sl && r <= sh {
                basis[i] = n + i;
                status.push(VarStatus::Basic);
                x.push(0.0);
            } else {
                let v = r.clamp(sl, sh);
                status.push(if v == sl {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                });
                x.push(v);
                sign[i] = if r - v >= 0.0 { 1.0 } else { -1.0 };
                needs_art.push(i);
            }
        }
        let first_artificial = n + m;
        for (k, &i) in needs_art.iter().enumerate() {
            lo.push(0.0);
            hi.push(f64::INFINITY);
            status.push(VarStatus::Basic);
            x.push(0.0);
            basis[i] = first_artificial + k;
        }
        let ncols = first_artificial + needs_art.len();
        let width = ncols + 1;

        let mut t = vec![0.0; m * width];
        for (i, row) in rows.iter().enumerate() {
            let s = sign[i];
            let base = i * width;
            for (&j, &a) in row.idx.iter().zip(&row.val) {
                t[base + j] = s * a;
            }
            t[base + n + i] = s;
            t[base + ncols] = s * row.rhs;
        }
        for (k, &i) in needs_art.iter().enumerate() {
            t[i * width + first_artificial + k] = 1.0;
        }

        let mut origin = vec![Vec::new(); width];
        for i in 0..m {
            for (c, &v) in t[i * width..(i + 1) * width].iter().enumerate() {
                if v != 0.0 {
                    origin[c].push((i, v));
                }
            }
        }

        let mut cost = problem.objective.clone();
        cost.resize(ncols, 0.0);

        let mut tab = Self {
            m,
            n,
            ncols,
            width,
            t,
            lo,
            hi,
            cost,
            d: vec![0.0; ncols],
            status,
            x,
            basis,
            beta: vec![0.0; m],
            first_artificial,
            offset: problem.objective_offset,
            tol,
            pivots: 0,
            pivots_this_solve: 0,
        };
        tab.recompute_beta();
        tab
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lo[j] == self.hi[j]
    }

    /// Recomputes basic values from the rhs column and nonbasic values.
    pub(crate) fn recompute_beta(&mut self) {
        let nz: Vec<(usize, f64)> = (0..self.ncols)
            .filter(|&j| self.status[j] != VarStatus::Basic && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for i in 0..self.m {
            let row = &self.t[i * self.width..(i + 1) * self.width];
            let mut v = row[self.ncols];
            for &(j, xj) in &nz {
                v -= row[j] * xj;
            }
            self.beta[i] = v;
        }
    }

    fn compute_reduced_costs(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.width..i * self.width + self.ncols];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for i in 0..self.m {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.t[r * w + q];
        let inv = 1.0 / piv;
        let mut nz = Vec::with_capacity(64);
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            for (k, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        nz.push(k);
                    }
                }
            }
            row[q] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let update = |row: &mut [f64]| {
            let f = row[q];
            if f == 0.0 {
                return;
            }
            for &k in &nz {
                let v = row[k] - f * prow[k];
                row[k] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
        };
        before.chunks_exact_mut(w).for_each(update);
        after.chunks_exact_mut(w).for_each(update);

        let f = self.d[q];
        if f != 0.0 {
            for &k in &nz {
                if k < self.ncols {
                    self.d[k] -= f * prow[k];
                }
            }
        }
        self.d[q] = 0.0;

        let leaving = self.basis[r];
        self.basis[r] = q;
        self.status[q] = VarStatus::Basic;
        // caller fixes the leaving status; default to lower
        if self.status[leaving] == VarStatus::Basic {
            self.status[leaving] = VarStatus::AtLower;
        }
        self.pivots += 1;
        self.pivots_this_solve += 1;
    }

    fn bland_mode(&self) -> bool {
        self.pivots_this_solve > self.tol.bland_factor * self.m.max(1)
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.ncols) + 1000
    }

    /// Runs phase 1 (if artificials exist) then phase 2.
    pub(crate) fn solve_primal(&mut self) -> Result<LpStatus, LpError> {
        self.pivots_this_solve = 0;
        if self.ncols > self.first_artificial {
            let mut c1 = vec![0.0; self.ncols];
            for c in c1.iter_mut().skip(self.first_artificial) {
                *c = 1.0;
            }
            self.compute_reduced_costs(&c1);
            if self.primal_loop()? == LpStatus::Unbounded {
                // sum of nonnegative artificials cannot be unbounded below
                return Err(LpError::Numerical("phase 1 reported unbounded".into()));
            }
            let infeas = (0..self.m)
                .filter(|&i| self.basis[i] >= self.first_artificial)
                .map(|i| self.beta[i])
                .chain(
                    (self.first_artificial..self.ncols)
                        .filter(|&j| self.status[j] != VarStatus::Basic)
                        .map(|j| self.x[j]),
                )
                .fold(0.0f64, f64::max);
            // artificials are pinned to zero from here on; on an infeasible
            // exit the tableau is still left in phase-2 form for reuse
            for j in self.first_artificial..self.ncols {
                self.hi[j] = 0.0;
                if self.status[j] != VarStatus::Basic {
                    self.status[j] = VarStatus::AtLower;
                    self.x[j] = 0.0;
                }
            }
            self.recompute_beta();
            let cost = self.cost.clone();
            self.compute_reduced_costs(&cost);
            if infeas > self.tol.feasibility {
                return Ok(LpStatus::Infeasible);
            }
        } else {
            let cost = self.cost.clone();
            self.compute_reduced_costs(&cost);
        }
        self.primal_loop()
    }

    /// Primal simplex on the current reduced costs from a primal-feasible basis.
    fn primal_loop(&mut self) -> Result<LpStatus, LpError> {
        let cap = self.iteration_cap();
        let mut iters = 0usize;
        loop {
            iters += 1;
            if iters > cap {
                return Err(LpError::IterationLimit(iters));
            }
            let bland = self.bland_mode();
            let rc = self.tol.reduced_cost;
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.ncols {
                let dj = self.d[j];
                let eligible = match self.status[j] {
                    VarStatus::Basic => false,
                    _ if self.is_fixed(j) => false,
                    VarStatus::AtLower => dj < -rc,
                    VarStatus::AtUpper => dj > rc,
                    VarStatus::Free => dj.abs() > rc,
                };
                if !eligible {
                    continue;
                }
                if bland {
                    enter = Some((j, dj));
                    break;
                }
                if enter.is_none_or(|(_, best)| dj.abs() > best.abs()) {
                    enter = Some((j, dj));
                }
            }
            let Some((q, dq)) = enter else {
                return Ok(LpStatus::Optimal);
            };
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };

            let mut theta = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, bool)> = None; // (row, hits upper)
            let mut leave_alpha = 0.0f64;
            for i in 0..self.m {
                let a = self.at(i, q);
                if a.abs() < self.tol.pivot {
                    continue;
                }
                let k = self.basis[i];
                let rate = -dir * a; // d(x_k)/dθ
                let (limit, upper) = if rate < 0.0 {
                    if self.lo[k] == f64::NEG_INFINITY {
                        continue;
                    }
                    (((self.beta[i] - self.lo[k]) / -rate).max(0.0), false)
                } else {
                    if self.hi[k] == f64::INFINITY {
                        continue;
                    }
                    (((self.hi[k] - self.beta[i]) / rate).max(0.0), true)
                };
                let better = match leave {
                    None => limit < theta,
                    Some((r, _)) => {
                        if limit < theta - 1e-12 {
                            true
                        } else if limit <= theta + 1e-12 {
                            if bland {
                                k < self.basis[r]
                            } else {
                                a.abs() > leave_alpha
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = limit.min(theta);
                    leave = Some((i, upper));
                    leave_alpha = a.abs();
                }
            }
            if theta == f64::INFINITY {
                return Ok(LpStatus::Unbounded);
            }

            let step = dir * theta;
            if step != 0.0 {
                for i in 0..self.m {
                    let a = self.at(i, q);
                    if a != 0.0 {
                        self.beta[i] -= a * step;
                    }
                }
            }
            let new_xq = self.x[q] + step;
            match leave {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.status[q] = VarStatus::AtUpper;
                        self.x[q] = self.hi[q];
                    } else {
                        self.status[q] = VarStatus::AtLower;
                        self.x[q] = self.lo[q];
                    }
                    self.pivots_this_solve += 1;
                }
                Some((r, upper)) => {
                    let k = self.basis[r];
                    self.pivot(r, q);
                    self.set_leaving(k, upper);
                    self.beta[r] = new_xq;
                }
            }
        }
    }

    fn set_leaving(&mut self, k: usize, upper: bool) {
        if upper {
            self.status[k] = VarStatus::AtUpper;
            self.x[k] = self.hi[k];
        } else {
            self.status[k] = VarStatus::AtLower;
            self.x[k] = self.lo[k];
        }
    }

    /// Values of the structural columns.
    pub(crate) fn solution(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.x[..self.n].to_vec();
        for i in 0..self.m {
            let k = self.basis[i];
            if k < self.n {
                x[k] = self.beta[i];
            }
        }
        x
    }

    fn outcome(&self, status: LpStatus) -> LpOutcome {
        let (solution, objective_value) = if status == LpStatus::Optimal {
            let x = self.solution();
            let obj = self.offset + x.iter().zip(&self.cost).map(|(v, c)| v * c).sum::<f64>();
            (Some(x), Some(obj))
        } else {
            (None, None)
        };
        LpOutcome {
            status,
            solution,
            objective_value,
            iterations: self.pivots,
        }
    }
}

fn initial_nonbasic(lo: f64, hi: f64) -> (f64, VarStatus) {
    if lo.is_finite() {
        (lo, VarStatus::AtLower)
    } else if hi.is_finite() {
        (hi, VarStatus::AtUpper)
    } else {
        (0.0, VarStatus::Free)
    }
}
