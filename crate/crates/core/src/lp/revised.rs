//! Revised bounded simplex over a factorised basis.
//!
//! Every row `a·x {≤,=,≥} b` becomes `a·x + s = 0` with a logical `s` whose
//! bounds carry the right-hand side. The basis starts as the logicals. The
//! primal method minimises the sum of infeasibilities and the true cost in
//! one composite loop; the dual method re-optimises after bound changes.

use crate::error::LpError;

use super::factor::{Factor, SparseCol};
use super::{
    initial_nonbasic, row_violation, DualResult, LpProblem, LpStatus, LpTolerances, Relation,
    VarStatus,
};

/// Eta columns kept before a fresh factorisation.
const REFACTOR_EVERY: usize = 64;
/// Pivot candidates smaller than this fraction of the largest are skipped.
const PIVOT_REL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub(crate) struct Revised {
    m: usize,
    n: usize,
    /// Structural columns.
    cols: Vec<SparseCol>,
    /// Structural rows `(column, value)`.
    rows: Vec<Vec<(usize, f64)>>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    offset: f64,
    status: Vec<VarStatus>,
    /// Values of nonbasic variables (basic entries are stale).
    x: Vec<f64>,
    /// Variable held at each basis position.
    head: Vec<usize>,
    /// Basis position of each basic variable.
    pos: Vec<usize>,
    xb: Vec<f64>,
    d: Vec<f64>,
    factor: Factor,
    tol: LpTolerances,
    pub(crate) pivots: usize,
}

enum Phase {
    Done,
    Infeasible,
    Unbounded,
}

impl Revised {
    pub(crate) fn new(problem: &LpProblem, tol: LpTolerances) -> Self {
        let m = problem.constraints.len();
        let n = problem.num_vars;
        let mut cols: Vec<SparseCol> = vec![Vec::new(); n];
        let mut rows = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut lo = Vec::with_capacity(n + m);
        let mut hi = Vec::with_capacity(n + m);
        for &(l, h) in &problem.var_bounds {
            lo.push(l);
            hi.push(h);
        }
        for (i, c) in problem.constraints.iter().enumerate() {
            let row: Vec<(usize, f64)> = c
                .coeffs
                .iter()
                .enumerate()
                .filter(|&(_, &a)| a != 0.0)
                .map(|(j, &a)| (j, a))
                .collect();
            for &(j, a) in &row {
                cols[j].push((i, a));
            }
            rows.push(row);
            relations.push(c.relation);
            rhs.push(c.rhs);
            let (l, h) = match c.relation {
                Relation::Le => (-c.rhs, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, -c.rhs),
                Relation::Eq => (-c.rhs, -c.rhs),
            };
            lo.push(l);
            hi.push(h);
        }
        let mut cost = problem.objective.clone();
        cost.resize(n + m, 0.0);
        let mut engine = Self {
            m,
            n,
            cols,
            rows,
            relations,
            rhs,
            lo,
            hi,
            cost,
            offset: problem.objective_offset,
            status: vec![VarStatus::AtLower; n + m],
            x: vec![0.0; n + m],
            head: Vec::new(),
            pos: vec![usize::MAX; n + m],
            xb: vec![0.0; m],
            d: vec![0.0; n + m],
            factor: Factor::new(0, Vec::new()).expect("empty basis"),
            tol,
            pivots: 0,
        };
        engine.slack_basis();
        engine
    }

    fn slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n {
            let (v, s) = initial_nonbasic(self.lo[j], self.hi[j]);
            self.x[j] = v;
            self.status[j] = s;
            self.pos[j] = usize::MAX;
        }
        self.head = (n..n + m).collect();
        for i in 0..m {
            self.status[n + i] = VarStatus::Basic;
            self.pos[n + i] = i;
        }
        self.factor = Factor::new(m, (0..m).map(|i| vec![(i, 1.0)]).collect())
            .expect("identity is nonsingular");
        self.recompute_beta();
        self.compute_duals();
    }

    fn column(&self, j: usize) -> SparseCol {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, 1.0)]
        }
    }

    /// Refactorises the current basis; a singular basis is replaced by the
    /// logical basis. Returns false in that case.
    fn refactor(&mut self) -> bool {
        let cols: Vec<SparseCol> = self.head.iter().map(|&j| self.column(j)).collect();
        match Factor::new(self.m, cols) {
            Ok(f) => {
                self.factor = f;
                self.recompute_beta();
                self.compute_duals();
                true
            }
            Err(_) => {
                self.slack_basis();
                false
            }
        }
    }

    pub(crate) fn recompute_beta(&mut self) {
        let mut w = vec![0.0; self.m];
        for j in 0..self.n {
            if self.status[j] != VarStatus::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    w[i] -= a * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let j = self.n + i;
            if self.status[j] != VarStatus::Basic {
                w[i] -= self.x[j];
            }
        }
        self.factor.ftran(&mut w);
        self.xb = w;
    }

    /// Row prices for costs `cb` on the basis positions.
    fn prices(&self, mut cb: Vec<f64>) -> Vec<f64> {
        self.factor.btran(&mut cb);
        cb
    }

    fn reduced_cost(&self, j: usize, cost: f64, y: &[f64]) -> f64 {
        if j < self.n {
            cost - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>()
        } else {
            cost - y[j - self.n]
        }
    }

    fn compute_duals(&mut self) {
        let cb: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        let y = self.prices(cb);
        for j in 0..self.n + self.m {
            self.d[j] = if self.status[j] == VarStatus::Basic {
                0.0
            } else {
                self.reduced_cost(j, self.cost[j], &y)
            };
        }
    }

    fn ftran_column(&self, j: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.m];
        if j < self.n {
            for &(i, a) in &self.cols[j] {
                w[i] = a;
            }
        } else {
            w[j - self.n] = 1.0;
        }
        self.factor.ftran(&mut w);
        w
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.hi[j] - self.lo[j] <= 0.0
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.n) + 1000
    }

    /// Replaces the variable at basis position `r` with `q`; the leaving
    /// variable becomes nonbasic at `leave_value`.
    fn basis_change(
        &mut self,
        r: usize,
        q: usize,
        alpha: &[f64],
        leave_value: f64,
        leave_status: VarStatus,
    ) {
        let out = self.head[r];
        self.status[out] = leave_status;
        self.x[out] = leave_value;
        self.pos[out] = usize::MAX;
        self.head[r] = q;
        self.pos[q] = r;
        self.status[q] = VarStatus::Basic;
        self.d[q] = 0.0;
        self.factor.update(r, alpha);
        self.pivots += 1;
        if self.factor.num_etas() >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    fn leave_status(&self, j: usize, at_upper: bool) -> (f64, VarStatus) {
        if at_upper {
            (self.hi[j], VarStatus::AtUpper)
        } else {
            (self.lo[j], VarStatus::AtLower)
        }
    }

    /// Primal simplex from the current basis.
    pub(crate) fn solve_primal(&mut self) -> Result<LpStatus, LpError> {
        match self.primal_loop()? {
            Phase::Done => Ok(LpStatus::Optimal),
            Phase::Infeasible => Ok(LpStatus::Infeasible),
            Phase::Unbounded => Ok(LpStatus::Unbounded),
        }
    }

    fn primal_loop(&mut self) -> Result<Phase, LpError> {
        let feas = self.tol.feasibility;
        let dtol = self.tol.reduced_cost;
        let cap = self.iteration_cap();
        let bland_after = self.tol.bland_factor * self.m.max(1);
        let mut iters = 0usize;
        let mut retried = false;
        loop {
            iters += 1;
            if iters > cap {
                return Err(LpError::IterationLimit(cap));
            }
            let bland = iters > bland_after;
            // composite costs: infeasible basics push toward their bounds
            let mut cb = vec![0.0; self.m];
            let mut phase1 = false;
            for (p, c) in cb.iter_mut().enumerate() {
                let j = self.head[p];
                if self.xb[p] < self.lo[j] - feas {
                    *c = -1.0;
                    phase1 = true;
                } else if self.xb[p] > self.hi[j] + feas {
                    *c = 1.0;
                    phase1 = true;
                }
            }
            if !phase1 {
                for (p, c) in cb.iter_mut().enumerate() {
                    *c = self.cost[self.head[p]];
                }
            }
            let y = self.prices(cb);
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.n + self.m {
                if self.status[j] == VarStatus::Basic {
                    continue;
                }
                let cj = if phase1 { 0.0 } else { self.cost[j] };
                let dj = self.reduced_cost(j, cj, &y);
                if !phase1 {
                    self.d[j] = dj;
                }
                if self.is_fixed(j) {
                    continue;
                }
                let dir = match self.status[j] {
                    VarStatus::AtLower if dj < -dtol => 1.0,
                    VarStatus::AtUpper if dj > dtol => -1.0,
                    VarStatus::Free if dj.abs() > dtol => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, dj));
                    break;
                }
                if entering.is_none_or(|(_, _, best)| dj.abs() > best.abs()) {
                    entering = Some((j, dir, dj));
                }
            }
            let Some((q, dir, _)) = entering else {
                if phase1 {
                    if !retried && self.factor.num_etas() > 0 {
                        retried = true;
                        self.refactor();
                        continue;
                    }
                    return Ok(Phase::Infeasible);
                }
                return Ok(Phase::Done);
            };
            let alpha = self.ftran_column(q);
            let amax = alpha.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let piv_tol = self.tol.pivot.max(amax * PIVOT_REL);

            // Harris: largest step with bounds relaxed by `feas`, then the
            // biggest pivot within that step
            let limit = |p: usize, relax: f64| -> Option<(f64, bool)> {
                let a = alpha[p];
                if a.abs() <= piv_tol {
                    return None;
                }
                let j = self.head[p];
                let rate = -dir * a;
                let v = self.xb[p];
                let (lo, hi) = (self.lo[j], self.hi[j]);
                if v < lo - feas {
                    // below: only moving up is limited, at the lower bound
                    (rate > 0.0).then(|| (((lo - v) + relax) / rate, false))
                } else if v > hi + feas {
                    (rate < 0.0).then(|| (((hi - v) - relax) / rate, true))
                } else if rate < 0.0 {
                    lo.is_finite().then(|| (((lo - v) - relax) / rate, false))
                } else {
                    hi.is_finite().then(|| (((hi - v) + relax) / rate, true))
                }
            };
            let mut tmax = f64::INFINITY;
            for p in 0..self.m {
                if let Some((t, _)) = limit(p, feas) {
                    tmax = tmax.min(t.max(0.0));
                }
            }
            let span = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64, bool)> = None;
            if tmax.is_finite() {
                let mut best = 0.0;
                for p in 0..self.m {
                    if let Some((t, up)) = limit(p, 0.0) {
                        let t = t.max(0.0);
                        if t <= tmax {
                            let better = if bland {
                                leave.is_none_or(|(bp, bt, _)| {
                                    t < bt || (t == bt && self.head[p] < self.head[bp])
                                })
                            } else {
                                alpha[p].abs() > best
                            };
                            if better {
                                best = alpha[p].abs();
                                leave = Some((p, t, up));
                            }
                        }
                    }
                }
            }
            if span.is_finite() && leave.is_none_or(|(_, t, _)| span <= t) {
                // bound flip
                let t = span;
                self.x[q] += dir * t;
                self.status[q] = if dir > 0.0 {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                for p in 0..self.m {
                    self.xb[p] -= dir * t * alpha[p];
                }
                self.pivots += 1;
                continue;
            }
            let Some((r, t, up)) = leave else {
                if phase1 {
                    return Err(LpError::Numerical("phase 1 step unbounded".into()));
                }
                return Ok(Phase::Unbounded);
            };
            let out = self.head[r];
            let (lv, ls) = self.leave_status(out, up);
            let entering_value = self.x[q] + dir * t;
            for p in 0..self.m {
                self.xb[p] -= dir * t * alpha[p];
            }
            self.xb[r] = entering_value;
            self.basis_change(r, q, &alpha, lv, ls);
        }
    }

    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.status[j] == VarStatus::Basic {
            return;
        }
        // keep the nonbasic on the side its reduced cost prefers
        let (v, s) = if lo.is_finite() && hi.is_finite() {
            if self.d[j] < 0.0 && lo < hi {
                (hi, VarStatus::AtUpper)
            } else {
                (lo, VarStatus::AtLower)
            }
        } else {
            initial_nonbasic(lo, hi)
        };
        self.x[j] = v;
        self.status[j] = s;
    }

    fn is_dual_feasible(&self) -> bool {
        let tol = self.tol.reduced_cost;
        (0..self.n + self.m).all(|j| {
            if self.is_fixed(j) {
                return true;
            }
            match self.status[j] {
                VarStatus::Basic => true,
                VarStatus::AtLower => self.d[j] >= -tol,
                VarStatus::AtUpper => self.d[j] <= tol,
                VarStatus::Free => self.d[j].abs() <= tol,
            }
        })
    }

    pub(crate) fn objective(&self) -> f64 {
        let mut v = self.offset;
        for j in 0..self.n {
            let xj = if self.status[j] == VarStatus::Basic {
                self.xb[self.pos[j]]
            } else {
                self.x[j]
            };
            v += self.cost[j] * xj;
        }
        v
    }

    /// Dual simplex from the current basis. Falls back to the primal
    /// method when the basis has lost dual feasibility. `None` signals a
    /// numerical failure the caller should recover from.
    pub(crate) fn solve_dual(&mut self, cutoff: f64) -> Option<DualResult> {
        let feas = self.tol.feasibility;
        let dtol = self.tol.reduced_cost;
        let cap = self.iteration_cap();
        let mut iters = 0usize;
        let mut retried = false;
        loop {
            if !self.is_dual_feasible() {
                return match self.primal_loop() {
                    Ok(Phase::Done) if self.objective() >= cutoff => Some(DualResult::Cutoff),
                    Ok(Phase::Done) => Some(DualResult::Optimal),
                    Ok(Phase::Infeasible) => Some(DualResult::Infeasible),
                    _ => None,
                };
            }
            iters += 1;
            if iters > cap {
                return None;
            }
            if self.objective() >= cutoff {
                return Some(DualResult::Cutoff);
            }
            let mut leave: Option<(usize, f64)> = None;
            for p in 0..self.m {
                let j = self.head[p];
                let v = self.xb[p];
                let viol = (self.lo[j] - v).max(v - self.hi[j]);
                if viol > feas && leave.is_none_or(|(_, best)| viol > best) {
                    leave = Some((p, viol));
                }
            }
            let Some((r, _)) = leave else {
                return Some(DualResult::Optimal);
            };
            let out = self.head[r];
            let to_lower = self.xb[r] < self.lo[out];

            let mut rho = vec![0.0; self.m];
            rho[r] = 1.0;
            self.factor.btran(&mut rho);
            let mut alpha_r = vec![0.0; self.n + self.m];
            for (i, &ri) in rho.iter().enumerate() {
                if ri == 0.0 {
                    continue;
                }
                for &(j, a) in &self.rows[i] {
                    alpha_r[j] += ri * a;
                }
                alpha_r[self.n + i] = ri;
            }
            let amax = (0..self.n + self.m)
                .filter(|&j| self.status[j] != VarStatus::Basic && !self.is_fixed(j))
                .fold(0.0f64, |a, j| a.max(alpha_r[j].abs()));
            let piv_tol = self.tol.pivot.max(amax * PIVOT_REL);
            // ratio |d_j / α_rj| for columns that move x_r toward its bound
            let ratio = |j: usize, relax: f64| -> Option<f64> {
                if self.status[j] == VarStatus::Basic || self.is_fixed(j) {
                    return None;
                }
                let a = alpha_r[j];
                if a.abs() <= piv_tol {
                    return None;
                }
                // sign of α seen from the dual step direction
                let s = if to_lower { -a } else { a };
                let dj = self.d[j];
                match self.status[j] {
                    VarStatus::AtLower => (s > 0.0).then(|| (dj.max(0.0) + relax) / s),
                    VarStatus::AtUpper => (s < 0.0).then(|| (dj.min(0.0) - relax) / s),
                    VarStatus::Free => Some((dj.abs() + relax) / a.abs()),
                    VarStatus::Basic => None,
                }
            };
            let mut tmax = f64::INFINITY;
            for j in 0..self.n + self.m {
                if let Some(t) = ratio(j, dtol) {
                    tmax = tmax.min(t);
                }
            }
            if !tmax.is_finite() {
                if !retried && self.factor.num_etas() > 0 {
                    retried = true;
                    self.refactor();
                    continue;
                }
                return Some(DualResult::Infeasible);
            }
            let mut q = usize::MAX;
            let mut best = 0.0;
            for j in 0..self.n + self.m {
                if let Some(t) = ratio(j, 0.0) {
                    if t <= tmax && alpha_r[j].abs() > best {
                        best = alpha_r[j].abs();
                        q = j;
                    }
                }
            }
            if q == usize::MAX {
                return None;
            }
            let alpha_q = self.ftran_column(q);
            let arq = alpha_r[q];
            if (alpha_q[r] - arq).abs() > 1e-7 * (1.0 + arq.abs()) {
                if retried {
                    return None;
                }
                retried = true;
                self.refactor();
                continue;
            }
            retried = false;
            // dual step; θ keeps every reduced cost on its feasible side
            let mut theta = self.d[q] / arq;
            if (to_lower && theta > 0.0) || (!to_lower && theta < 0.0) {
                theta = 0.0;
            }
            if theta != 0.0 {
                for j in 0..self.n + self.m {
                    if self.status[j] != VarStatus::Basic && alpha_r[j] != 0.0 {
                        self.d[j] -= theta * alpha_r[j];
                    }
                }
            }
            let (lv, ls) = self.leave_status(out, !to_lower);
            let dq = -(lv - self.xb[r]) / alpha_q[r];
            for p in 0..self.m {
                self.xb[p] -= alpha_q[p] * dq;
            }
            self.xb[r] = self.x[q] + dq;
            self.d[out] = -theta;
            self.basis_change(r, q, &alpha_q, lv, ls);
        }
    }

    /// Values of the structural columns.
    pub(crate) fn solution(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                if self.status[j] == VarStatus::Basic {
                    self.xb[self.pos[j]]
                } else {
                    self.x[j]
                }
            })
            .collect()
    }

    pub(crate) fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Largest row or bound violation of a structural point.
    pub(crate) fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lo[j] - v).max(v - self.hi[j]);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let lhs: f64 = row.iter().map(|&(j, a)| a * x[j]).sum();
            worst = worst.max(row_violation(lhs, self.relations[i], self.rhs[i]));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng) -> LpProblem {
        let n = rng.random_range(1..8);
        let m = rng.random_range(1..8);
        let mut p = LpProblem::new(n);
        for j in 0..n {
            p.objective[j] = (rng.random_range(-4.0..4.0f64) * 2.0).round() / 2.0;
            let lo = if rng.random_bool(0.8) {
                rng.random_range(-3.0..0.0)
            } else {
                f64::NEG_INFINITY
            };
            let hi = if rng.random_bool(0.8) {
                rng.random_range(0.0..3.0)
            } else {
                f64::INFINITY
            };
            p.var_bounds[j] = (lo, hi);
        }
        for _ in 0..m {
            let coeffs: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.random_bool(0.6) {
                        (rng.random_range(-3.0..3.0f64) * 2.0).round() / 2.0
                    } else {
                        0.0
                    }
                })
                .collect();
            let rel = match rng.random_range(0..3) {
                0 => Relation::Le,
                1 => Relation::Ge,
                _ => Relation::Eq,
            };
            p.add_constraint(coeffs, rel, rng.random_range(-2.0..2.0));
        }
        p
    }

    fn check_same(p: &LpProblem, engine: &mut Revised, status: LpStatus) {
        let reference = solve_lp(p, &LpTolerances::default()).unwrap();
        assert_eq!(status, reference.status);
        if status == LpStatus::Optimal {
            let x = engine.solution();
            assert!(p.max_violation(&x) < 1e-6);
            let obj = engine.objective();
            assert!((obj - reference.objective_value.unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn primal_agrees_with_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..400 {
            let p = random_problem(&mut rng);
            let mut e = Revised::new(&p, LpTolerances::default());
            let status = e.solve_primal().unwrap();
            check_same(&p, &mut e, status);
        }
    }

    #[test]
    fn dual_reoptimisation_agrees_with_fresh_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..400 {
            let mut p = random_problem(&mut rng);
            let mut e = Revised::new(&p, LpTolerances::default());
            if e.solve_primal().unwrap() != LpStatus::Optimal {
                continue;
            }
            for _ in 0..4 {
                let j = rng.random_range(0..p.num_vars);
                let x = e.solution()[j];
                let (lo, hi) = p.var_bounds[j];
                let (lo, hi) = if rng.random_bool(0.5) {
                    (lo, x.floor().max(lo))
                } else {
                    (x.ceil().min(hi), hi)
                };
                if lo > hi {
                    continue;
                }
                p.var_bounds[j] = (lo, hi);
                e.set_bounds(j, lo, hi);
                e.recompute_beta();
                let status = match e.solve_dual(f64::INFINITY) {
                    Some(DualResult::Optimal) => LpStatus::Optimal,
                    Some(DualResult::Infeasible) => LpStatus::Infeasible,
                    other => panic!("unexpected {other:?}"),
                };
                check_same(&p, &mut e, status);
                checked += 1;
                if status != LpStatus::Optimal {
                    break;
                }
            }
        }
        assert!(checked > 200);
    }
}
