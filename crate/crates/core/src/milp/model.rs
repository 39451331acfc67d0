use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::lp::{row_violation, LinearConstraint, LpProblem, Relation};

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
    /// Branching class; fractional binaries of a higher class are branched
    /// on first.
    #[serde(default)]
    pub priority: u8,
}

impl VarSpec {
    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Binary,
            lo: 0.0,
            hi: 1.0,
            priority: 0,
        }
    }

    pub fn continuous(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            kind: VarKind::Continuous,
            lo,
            hi,
            priority: 0,
        }
    }

    pub fn with_priority(mut self, priority: u8) -> Self {
        self.priority = priority;
        self
    }

    pub fn is_binary(&self) -> bool {
        self.kind == VarKind::Binary
    }
}

/// Index of a variable, tagged with the model that issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarHandle {
    model: u64,
    index: usize,
}

impl VarHandle {
    pub fn index(&self) -> usize {
        self.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub usize);

/// A constraint row stored as (variable index, coefficient) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseConstraint {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl SparseConstraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// Mixed-binary linear minimisation model built incrementally.
///
/// Variables and constraints keep insertion order, which fixes the column
/// and row order of every LP derived from the model.
#[derive(Debug, Clone)]
pub struct MilpModel {
    id: u64,
    vars: Vec<VarSpec>,
    names: HashMap<String, usize>,
    constraints: Vec<SparseConstraint>,
    objective: Vec<f64>,
    objective_offset: f64,
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

impl MilpModel {
    pub fn new() -> Self {
        Self {
            id: NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed),
            vars: Vec::new(),
            names: HashMap::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
        }
    }

    pub fn add_var(&mut self, spec: VarSpec) -> Result<VarHandle, ModelError> {
        if self.names.contains_key(&spec.name) {
            return Err(ModelError::DuplicateName(spec.name));
        }
        let bad_bounds = spec.lo.is_nan()
            || spec.hi.is_nan()
            || spec.lo > spec.hi
            || spec.lo == f64::INFINITY
            || spec.hi == f64::NEG_INFINITY
            || (spec.is_binary() && (spec.lo != 0.0 || spec.hi != 1.0));
        if bad_bounds {
            return Err(ModelError::InvalidBounds {
                name: spec.name,
                lo: spec.lo,
                hi: spec.hi,
            });
        }
        let index = self.vars.len();
        self.names.insert(spec.name.clone(), index);
        self.vars.push(spec);
        self.objective.push(0.0);
        Ok(VarHandle {
            model: self.id,
            index,
        })
    }

    fn check(&self, h: VarHandle) -> Result<usize, ModelError> {
        if h.model != self.id || h.index >= self.vars.len() {
            return Err(ModelError::StaleHandle { index: h.index });
        }
        Ok(h.index)
    }

    /// Adds `Σ coeff·var  relation  rhs`. Repeated handles are summed.
    pub fn add_constraint(
        &mut self,
        coeffs: &[(VarHandle, f64)],
        relation: Relation,
        rhs: f64,
    ) -> Result<ConstraintId, ModelError> {
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(format!(
                "rhs of constraint {}",
                self.constraints.len()
            )));
        }
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for &(h, a) in coeffs {
            let j = self.check(h)?;
            if !a.is_finite() {
                return Err(ModelError::NonFinite(format!(
                    "coefficient of `{}` in constraint {}",
                    self.vars[j].name,
                    self.constraints.len()
                )));
            }
            match terms.iter_mut().find(|(k, _)| *k == j) {
                Some(t) => t.1 += a,
                None => terms.push((j, a)),
            }
        }
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(SparseConstraint {
            terms,
            relation,
            rhs,
        });
        Ok(id)
    }

    pub fn set_objective_coeff(&mut self, h: VarHandle, c: f64) -> Result<(), ModelError> {
        let j = self.check(h)?;
        if !c.is_finite() {
            return Err(ModelError::NonFinite("objective coefficient".into()));
        }
        self.objective[j] = c;
        Ok(())
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.objective_offset += c;
    }

    pub fn var(&self, h: VarHandle) -> Result<&VarSpec, ModelError> {
        self.check(h).map(|j| &self.vars[j])
    }

    pub fn handle_by_name(&self, name: &str) -> Option<VarHandle> {
        self.names.get(name).map(|&index| VarHandle {
            model: self.id,
            index,
        })
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn constraints(&self) -> &[SparseConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn binary_indices(&self) -> Vec<usize> {
        (0..self.vars.len())
            .filter(|&j| self.vars[j].is_binary())
            .collect()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.is_binary()).count()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Largest violation of any bound or row by `x` (integrality ignored).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, &xj) in self.vars.iter().zip(x) {
            worst = worst.max(v.lo - xj).max(xj - v.hi);
        }
        for c in &self.constraints {
            worst = worst.max(row_violation(c.lhs(x), c.relation, c.rhs));
        }
        worst
    }

    /// Largest distance of a binary variable from {0, 1}.
    pub fn max_integrality_violation(&self, x: &[f64]) -> f64 {
        self.vars
            .iter()
            .zip(x)
            .filter(|(v, _)| v.is_binary())
            .map(|(_, &xj)| (xj - xj.round()).abs())
            .fold(0.0, f64::max)
    }

    /// The continuous relaxation: binaries become `[0,1]` continuous columns.
    pub fn relax(&self) -> LpProblem {
        let n = self.vars.len();
        LpProblem {
            num_vars: n,
            objective: self.objective.clone(),
            objective_offset: self.objective_offset,
            var_bounds: self.vars.iter().map(|v| (v.lo, v.hi)).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| {
                    let mut coeffs = vec![0.0; n];
                    for &(j, a) in &c.terms {
                        coeffs[j] = a;
                    }
                    LinearConstraint {
                        coeffs,
                        relation: c.relation,
                        rhs: c.rhs,
                    }
                })
                .collect(),
        }
    }

    /// Plain-text dump in an LP-file-like layout (see `docs/formats.md`).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "\\ {} variables ({} binary), {} constraints",
            self.vars.len(),
            self.num_binaries(),
            self.constraints.len()
        );
        s.push_str("Minimize\n obj:");
        let mut any = false;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                let _ = write!(s, " {} {}", signed(c), self.vars[j].name);
                any = true;
            }
        }
        if self.objective_offset != 0.0 || !any {
            let _ = write!(s, " {}", signed(self.objective_offset));
        }
        s.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let _ = write!(s, " c{i}:");
            if c.terms.is_empty() {
                s.push_str(" 0");
            }
            for &(j, a) in &c.terms {
                let _ = write!(s, " {} {}", signed(a), self.vars[j].name);
            }
            let _ = writeln!(s, " {} {}", c.relation, c.rhs);
        }
        s.push_str("Bounds\n");
        for v in self.vars.iter().filter(|v| !v.is_binary()) {
            let _ = writeln!(s, " {} <= {} <= {}", bound(v.lo), v.name, bound(v.hi));
        }
        s.push_str("Binaries\n");
        for v in self.vars.iter().filter(|v| v.is_binary()) {
            let _ = writeln!(s, " {}", v.name);
        }
        s.push_str("End\n");
        s
    }
}

fn signed(v: f64) -> String {
    if v.is_sign_negative() {
        format!("- {}", -v)
    } else {
        format!("+ {v}")
    }
}

fn bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}
