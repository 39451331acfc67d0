use serde::{Deserialize, Serialize};

use crate::error::FormulationError;
use crate::lp::{solve_lp, LpProblem, LpStatus, LpTolerances, Relation};
use crate::milp::model::{MilpModel, VarHandle, VarSpec};

use super::scenario::{Rect, Scenario};

/// Obstacle-avoidance strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Unclustered,
    Clustered(usize),
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Unclustered => f.write_str("unclustered"),
            Mode::Clustered(n) => write!(f, "clusters={n}"),
        }
    }
}

/// Avoidance plus assignment binaries: `4·Ns·No` without clustering,
/// `(4·Ns + No)·Nc` with `Nc` clusters.
pub fn count_binaries(mode: Mode, ns: usize, no: usize) -> usize {
    match mode {
        Mode::Unclustered => 4 * ns * no,
        Mode::Clustered(nc) => (4 * ns + no) * nc,
    }
}

/// Number of prediction steps that carry avoidance rows for horizon `ns`
/// (steps `1..=ns+1`).
pub fn avoidance_steps(ns: usize) -> usize {
    ns + 1
}

/// Column indices of every decision variable in a built model.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub mode: Mode,
    pub ns: usize,
    pub num_obstacles: usize,
    /// States `j = 0..=ns+1`, each `[r_x, v_x, r_y, v_y]`.
    pub states: Vec<[usize; 4]>,
    /// Controls `j = 0..=ns`.
    pub controls: Vec<[usize; 2]>,
    /// 1-norm epigraph variables, one per control component.
    pub effort: Vec<[usize; 2]>,
    /// Arrival binaries for steps `1..=ns+1` (index `j-1`).
    pub arrival: Vec<usize>,
    /// `b^O[j][i]` at index `(j-1)·No + i`, sides left, down, right, up.
    pub obstacle_bins: Vec<[usize; 4]>,
    /// Cluster coordinates `[x_min, y_min, x_max, y_max]`.
    pub cluster_coords: Vec<[usize; 4]>,
    /// `b^R[ℓ][i]` at index `ℓ·No + i`.
    pub assignment: Vec<usize>,
    /// `b^C[j][ℓ]` at index `(j-1)·Nc + ℓ`.
    pub cluster_bins: Vec<[usize; 4]>,
}

impl Layout {
    pub fn num_clusters(&self) -> usize {
        self.cluster_coords.len()
    }

    /// Binaries used for collision avoidance (b^O, or b^C + b^R).
    pub fn avoidance_binary_count(&self) -> usize {
        4 * self.obstacle_bins.len() + 4 * self.cluster_bins.len() + self.assignment.len()
    }
}

/// A built model together with its column layout.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub model: MilpModel,
    pub layout: Layout,
    pub x0: [f64; 4],
}

/// Branching classes: arrival step first, then cluster assignment, then
/// avoidance sides.
pub const ARRIVAL_PRIORITY: u8 = 2;
pub const ASSIGNMENT_PRIORITY: u8 = 1;

const COMPONENTS: [&str; 4] = ["rx", "vx", "ry", "vy"];
const AXES: [&str; 2] = ["ax", "ay"];

struct Builder {
    model: MilpModel,
    handles: Vec<VarHandle>,
}

impl Builder {
    fn var(&mut self, spec: VarSpec) -> Result<usize, FormulationError> {
        let h = self.model.add_var(spec)?;
        self.handles.push(h);
        Ok(h.index())
    }

    fn row(
        &mut self,
        terms: &[(usize, f64)],
        rel: Relation,
        rhs: f64,
    ) -> Result<(), FormulationError> {
        let coeffs: Vec<(VarHandle, f64)> =
            terms.iter().map(|&(j, a)| (self.handles[j], a)).collect();
        self.model.add_constraint(&coeffs, rel, rhs)?;
        Ok(())
    }

    fn cost(&mut self, j: usize, c: f64) -> Result<(), FormulationError> {
        let h = self.handles[j];
        self.model.set_objective_coeff(h, c)?;
        Ok(())
    }
}

/// Per-obstacle big-M avoidance.
pub fn build_unclustered(scn: &Scenario, x0: &[f64; 4]) -> Result<Formulation, FormulationError> {
    build(scn, x0, Mode::Unclustered)
}

/// Avoidance of `nc` optimizer-chosen clusters with obstacle assignment.
pub fn build_clustered(
    scn: &Scenario,
    x0: &[f64; 4],
    nc: usize,
) -> Result<Formulation, FormulationError> {
    if nc == 0 {
        return Err(FormulationError::NoClusters);
    }
    build(scn, x0, Mode::Clustered(nc))
}

pub fn build(scn: &Scenario, x0: &[f64; 4], mode: Mode) -> Result<Formulation, FormulationError> {
    scn.validate()?;
    scn.check_initial_state(x0)?;
    if mode == Mode::Clustered(0) {
        return Err(FormulationError::NoClusters);
    }
    let ns = scn.ns;
    let no = scn.obstacles.len();
    let ws = scn.workspace;
    let mut b = Builder {
        model: MilpModel::new(),
        handles: Vec::new(),
    };

    // states
    let mut states = Vec::with_capacity(ns + 2);
    for j in 0..=ns + 1 {
        let mut idx = [0usize; 4];
        for (c, name) in COMPONENTS.iter().enumerate() {
            let (lo, hi) = if j == 0 {
                (x0[c], x0[c])
            } else if c % 2 == 0 {
                if c == 0 {
                    (ws.x_min, ws.x_max)
                } else {
                    (ws.y_min, ws.y_max)
                }
            } else {
                (-scn.v_max, scn.v_max)
            };
            idx[c] = b.var(VarSpec::continuous(format!("{name}_{j}"), lo, hi))?;
        }
        states.push(idx);
    }
    // controls and their 1-norm epigraph
    let mut controls = Vec::with_capacity(ns + 1);
    let mut effort = Vec::with_capacity(ns + 1);
    for j in 0..=ns {
        let mut u = [0usize; 2];
        let mut s = [0usize; 2];
        for (c, name) in AXES.iter().enumerate() {
            u[c] = b.var(VarSpec::continuous(
                format!("{name}_{j}"),
                -scn.a_max,
                scn.a_max,
            ))?;
        }
        for (c, name) in ["sx", "sy"].iter().enumerate() {
            s[c] = b.var(VarSpec::continuous(format!("{name}_{j}"), 0.0, scn.a_max))?;
        }
        controls.push(u);
        effort.push(s);
    }
    let reachable = reachable_steps(scn, x0)?;
    let arrival: Vec<usize> = (1..=ns + 1)
        .map(|j| b.var(VarSpec::binary(format!("bT_{j}")).with_priority(ARRIVAL_PRIORITY)))
        .collect::<Result<_, _>>()?;

    // dynamics x_{j+1} = A x_j + B u_j
    let a = &scn.dynamics.a;
    let bm = &scn.dynamics.b;
    for j in 0..=ns {
        for r in 0..4 {
            let mut terms = vec![(states[j + 1][r], 1.0)];
            for c in 0..4 {
                if a[(r, c)] != 0.0 {
                    terms.push((states[j][c], -a[(r, c)]));
                }
            }
            for c in 0..2 {
                if bm[(r, c)] != 0.0 {
                    terms.push((controls[j][c], -bm[(r, c)]));
                }
            }
            b.row(&terms, Relation::Eq, 0.0)?;
        }
    }
    // s >= |u|
    for j in 0..=ns {
        for c in 0..2 {
            b.row(
                &[(effort[j][c], 1.0), (controls[j][c], -1.0)],
                Relation::Ge,
                0.0,
            )?;
            b.row(
                &[(effort[j][c], 1.0), (controls[j][c], 1.0)],
                Relation::Ge,
                0.0,
            )?;
        }
    }

    // variable horizon: exactly one arrival step, terminal set at that step
    let ones: Vec<(usize, f64)> = arrival.iter().map(|&k| (k, 1.0)).collect();
    b.row(&ones, Relation::Eq, 1.0)?;
    let unreachable: Vec<(usize, f64)> = (1..=ns + 1)
        .filter(|&j| !reachable[j - 1])
        .map(|j| (arrival[j - 1], 1.0))
        .collect();
    if !unreachable.is_empty() {
        b.row(&unreachable, Relation::Eq, 0.0)?;
    }
    let q = scn.terminal;
    for j in 1..=ns + 1 {
        let bt = arrival[j - 1];
        for c in 0..4 {
            let m = match c {
                0 | 2 => scn.big_m.terminal,
                _ => 2.0 * scn.v_max,
            };
            let x = states[j][c];
            b.row(&[(x, 1.0), (bt, m)], Relation::Le, q.hi[c] + m)?;
            b.row(&[(x, 1.0), (bt, -m)], Relation::Ge, q.lo[c] - m)?;
        }
    }
    // no thrust once arrived: |u_j| <= a_max (1 - Σ_{m<=j} bT_m)
    for j in 1..=ns {
        for c in 0..2 {
            let u = controls[j][c];
            for sign in [1.0, -1.0] {
                let mut terms = vec![(u, sign)];
                terms.extend(arrival[..j].iter().map(|&k| (k, scn.a_max)));
                b.row(&terms, Relation::Le, scn.a_max)?;
            }
        }
    }

    // time cost Σ j·bT_j plus γ Σ s
    for j in 1..=ns + 1 {
        b.cost(arrival[j - 1], j as f64)?;
    }
    if scn.gamma != 0.0 {
        for s in effort.iter().flatten().copied().collect::<Vec<_>>() {
            b.cost(s, scn.gamma)?;
        }
    }

    let mut obstacle_bins = Vec::new();
    let mut cluster_coords = Vec::new();
    let mut assignment = Vec::new();
    let mut cluster_bins = Vec::new();
    match mode {
        Mode::Unclustered => {
            let m = scn.big_m.obstacle;
            for j in 1..=ns + 1 {
                for (i, o) in scn.obstacles.iter().enumerate() {
                    let bins = side_binaries(&mut b, "bO", j, i + 1)?;
                    let [rx, _, ry, _] = states[j];
                    avoid_fixed(&mut b, rx, ry, o, &bins, m)?;
                    obstacle_bins.push(bins);
                }
            }
        }
        Mode::Clustered(nc) => {
            for l in 1..=nc {
                let mut c = [0usize; 4];
                for (k, (name, lo, hi)) in [
                    ("cxmin", ws.x_min, ws.x_max),
                    ("cymin", ws.y_min, ws.y_max),
                    ("cxmax", ws.x_min, ws.x_max),
                    ("cymax", ws.y_min, ws.y_max),
                ]
                .into_iter()
                .enumerate()
                {
                    c[k] = b.var(VarSpec::continuous(format!("{name}_{l}"), lo, hi))?;
                }
                cluster_coords.push(c);
            }
            for l in 1..=nc {
                for i in 1..=no {
                    let spec =
                        VarSpec::binary(format!("bR_{l}_{i}")).with_priority(ASSIGNMENT_PRIORITY);
                    assignment.push(b.var(spec)?);
                }
            }
            // containment: b^R = 1 forces O_i ⊆ C_ℓ
            let mc = scn.big_m.containment;
            for l in 0..nc {
                let c = cluster_coords[l];
                for (i, o) in scn.obstacles.iter().enumerate() {
                    let br = assignment[l * no + i];
                    b.row(&[(c[0], 1.0), (br, mc)], Relation::Le, o.x_min + mc)?;
                    b.row(&[(c[1], 1.0), (br, mc)], Relation::Le, o.y_min + mc)?;
                    b.row(&[(c[2], -1.0), (br, mc)], Relation::Le, -o.x_max + mc)?;
                    b.row(&[(c[3], -1.0), (br, mc)], Relation::Le, -o.y_max + mc)?;
                }
            }
            for i in 0..no {
                let terms: Vec<(usize, f64)> =
                    (0..nc).map(|l| (assignment[l * no + i], 1.0)).collect();
                b.row(&terms, Relation::Eq, 1.0)?;
            }
            let m = scn.big_m.cluster;
            for j in 1..=ns + 1 {
                for (l, c) in cluster_coords.iter().enumerate() {
                    let bins = side_binaries(&mut b, "bC", j, l + 1)?;
                    let [rx, _, ry, _] = states[j];
                    b.row(&[(rx, 1.0), (c[0], -1.0), (bins[0], -m)], Relation::Le, 0.0)?;
                    b.row(&[(ry, 1.0), (c[1], -1.0), (bins[1], -m)], Relation::Le, 0.0)?;
                    b.row(&[(rx, -1.0), (c[2], 1.0), (bins[2], -m)], Relation::Le, 0.0)?;
                    b.row(&[(ry, -1.0), (c[3], 1.0), (bins[3], -m)], Relation::Le, 0.0)?;
                    let sum: Vec<(usize, f64)> = bins.iter().map(|&k| (k, 1.0)).collect();
                    b.row(&sum, Relation::Le, 3.0)?;
                    cluster_bins.push(bins);
                }
            }
            if scn.symmetry_breaking {
                for l in 1..nc {
                    b.row(
                        &[
                            (cluster_coords[l - 1][0], 1.0),
                            (cluster_coords[l][0], -1.0),
                        ],
                        Relation::Le,
                        0.0,
                    )?;
                }
            }
        }
    }

    let layout = Layout {
        mode,
        ns,
        num_obstacles: no,
        states,
        controls,
        effort,
        arrival,
        obstacle_bins,
        cluster_coords,
        assignment,
        cluster_bins,
    };
    Ok(Formulation {
        model: b.model,
        layout,
        x0: *x0,
    })
}

/// For each step `j = 1..=ns+1`, whether the terminal box can be reached at
/// exactly that step when obstacles are ignored. Arrival binaries of the
/// other steps are fixed to zero.
pub fn reachable_steps(scn: &Scenario, x0: &[f64; 4]) -> Result<Vec<bool>, FormulationError> {
    let ws = scn.workspace;
    let q = scn.terminal;
    let a = &scn.dynamics.a;
    let bm = &scn.dynamics.b;
    let mut out = Vec::with_capacity(scn.ns + 1);
    for j in 1..=scn.ns + 1 {
        // columns: states 1..=j (4 each) then controls 0..j (2 each)
        let n = 6 * j;
        let sx = |k: usize, c: usize| 4 * (k - 1) + c;
        let ux = |k: usize, c: usize| 4 * j + 2 * k + c;
        let mut lp = LpProblem::new(n);
        let mut empty = false;
        for k in 1..=j {
            for c in 0..4 {
                let (mut lo, mut hi) = match c {
                    0 => (ws.x_min, ws.x_max),
                    2 => (ws.y_min, ws.y_max),
                    _ => (-scn.v_max, scn.v_max),
                };
                if k == j {
                    lo = lo.max(q.lo[c]);
                    hi = hi.min(q.hi[c]);
                    empty |= lo > hi;
                }
                lp.var_bounds[sx(k, c)] = (lo, hi.max(lo));
            }
        }
        if empty {
            out.push(false);
            continue;
        }
        for k in 0..j {
            for c in 0..2 {
                lp.var_bounds[ux(k, c)] = (-scn.a_max, scn.a_max);
            }
        }
        for k in 0..j {
            for r in 0..4 {
                let mut coeffs = vec![0.0; n];
                coeffs[sx(k + 1, r)] = 1.0;
                let mut rhs = 0.0;
                for c in 0..4 {
                    if k == 0 {
                        rhs += a[(r, c)] * x0[c];
                    } else {
                        coeffs[sx(k, c)] -= a[(r, c)];
                    }
                }
                for c in 0..2 {
                    coeffs[ux(k, c)] -= bm[(r, c)];
                }
                lp.add_constraint(coeffs, Relation::Eq, rhs);
            }
        }
        let status = solve_lp(&lp, &LpTolerances::default())
            .map_err(|e| FormulationError::Model(e.into()))?
            .status;
        out.push(status == LpStatus::Optimal);
    }
    Ok(out)
}

fn side_binaries(
    b: &mut Builder,
    prefix: &str,
    j: usize,
    k: usize,
) -> Result<[usize; 4], FormulationError> {
    let mut bins = [0usize; 4];
    for (f, slot) in bins.iter_mut().enumerate() {
        *slot = b.var(VarSpec::binary(format!("{prefix}_{j}_{k}_{}", f + 1)))?;
    }
    Ok(bins)
}

/// Four big-M half-plane rows plus the side-count row for a fixed rectangle.
fn avoid_fixed(
    b: &mut Builder,
    rx: usize,
    ry: usize,
    o: &Rect,
    bins: &[usize; 4],
    m: f64,
) -> Result<(), FormulationError> {
    b.row(&[(rx, 1.0), (bins[0], -m)], Relation::Le, o.x_min)?;
    b.row(&[(ry, 1.0), (bins[1], -m)], Relation::Le, o.y_min)?;
    b.row(&[(rx, -1.0), (bins[2], -m)], Relation::Le, -o.x_max)?;
    b.row(&[(ry, -1.0), (bins[3], -m)], Relation::Le, -o.y_max)?;
    let sum: Vec<(usize, f64)> = bins.iter().map(|&k| (k, 1.0)).collect();
    b.row(&sum, Relation::Le, 3.0)?;
    Ok(())
}

impl Formulation {
    /// Builds a warm-start vector for this model by shifting `prev`, an
    /// assignment of a model built one step earlier for the same scenario
    /// and mode, forward by one step. The appended last step coasts with
    /// zero input. Returns `None` when the shift is impossible (arrival
    /// was at the first step, or the coasting point cannot avoid some
    /// rectangle).
    pub fn shifted_warm_start(
        &self,
        prev: &Formulation,
        prev_x: &[f64],
        scn: &Scenario,
    ) -> Option<Vec<f64>> {
        let lay = &self.layout;
        let pl = &prev.layout;
        if lay.mode != pl.mode || lay.ns != pl.ns || lay.num_obstacles != pl.num_obstacles {
            return None;
        }
        if prev_x.len() != prev.model.num_vars() {
            return None;
        }
        let ns = lay.ns;
        if prev_x[pl.arrival[0]] > 0.5 {
            return None;
        }
        let mut x = vec![0.0; self.model.num_vars()];

        for c in 0..4 {
            x[lay.states[0][c]] = self.x0[c];
        }
        for j in 1..=ns {
            for c in 0..4 {
                x[lay.states[j][c]] = prev_x[pl.states[j + 1][c]];
            }
        }
        let last: Vec<f64> = pl.states[ns + 1].iter().map(|&k| prev_x[k]).collect();
        let coast = scn.dynamics.step(&last, &[0.0, 0.0]);
        for c in 0..4 {
            x[lay.states[ns + 1][c]] = coast[c];
        }
        for j in 0..ns {
            for c in 0..2 {
                let u = prev_x[pl.controls[j + 1][c]];
                x[lay.controls[j][c]] = u;
                x[lay.effort[j][c]] = u.abs();
            }
        }
        for j in 0..ns {
            x[lay.arrival[j]] = prev_x[pl.arrival[j + 1]].round();
        }
        x[lay.arrival[ns]] = 0.0;

        let (rx, ry) = (coast[0], coast[2]);
        let sides = |r: &Rect| -> Option<[f64; 4]> {
            let ok = [rx <= r.x_min, ry <= r.y_min, rx >= r.x_max, ry >= r.y_max];
            if ok.iter().any(|&v| v) {
                Some(ok.map(|v| if v { 0.0 } else { 1.0 }))
            } else {
                None
            }
        };
        match lay.mode {
            Mode::Unclustered => {
                let no = lay.num_obstacles;
                for j in 1..=ns {
                    for i in 0..no {
                        let dst = lay.obstacle_bins[(j - 1) * no + i];
                        let src = pl.obstacle_bins[j * no + i];
                        for f in 0..4 {
                            x[dst[f]] = prev_x[src[f]].round();
                        }
                    }
                }
                for (i, o) in scn.obstacles.iter().enumerate() {
                    let vals = sides(o)?;
                    let dst = lay.obstacle_bins[ns * no + i];
                    for f in 0..4 {
                        x[dst[f]] = vals[f];
                    }
                }
            }
            Mode::Clustered(nc) => {
                for (dst, src) in lay.cluster_coords.iter().zip(&pl.cluster_coords) {
                    for k in 0..4 {
                        x[dst[k]] = prev_x[src[k]];
                    }
                }
                for (&dst, &src) in lay.assignment.iter().zip(&pl.assignment) {
                    x[dst] = prev_x[src].round();
                }
                for j in 1..=ns {
                    for l in 0..nc {
                        let dst = lay.cluster_bins[(j - 1) * nc + l];
                        let src = pl.cluster_bins[j * nc + l];
                        for f in 0..4 {
                            x[dst[f]] = prev_x[src[f]].round();
                        }
                    }
                }
                for l in 0..nc {
                    let c = lay.cluster_coords[l].map(|k| x[k]);
                    let rect = Rect::new(c[0], c[1], c[2], c[3]);
                    let vals = sides(&rect)?;
                    let dst = lay.cluster_bins[ns * nc + l];
                    for f in 0..4 {
                        x[dst[f]] = vals[f];
                    }
                }
            }
        }
        Some(x)
    }
}
