//! Starting points for clustered models.

use crate::error::FormulationError;
use crate::lp::Relation;
use crate::milp::{BranchAndBound, SolverOptions};

use super::build::{Formulation, Mode};
use super::scenario::{Rect, Scenario};

/// Groups obstacles into at most `nc` groups by repeatedly merging the two
/// groups whose joint bounding box adds the least area. Returns the group
/// index of each obstacle.
pub fn group_obstacles(obstacles: &[Rect], nc: usize) -> Vec<usize> {
    let area = |r: &Rect| r.width() * r.height();
    let mut groups: Vec<(Rect, Vec<usize>)> = obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| (*o, vec![i]))
        .collect();
    while groups.len() > nc.max(1) {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let joint = Rect::bounding([groups[a].0, groups[b].0]).expect("two rectangles");
                let added = area(&joint) - area(&groups[a].0) - area(&groups[b].0);
                if best.is_none_or(|(c, _, _)| added < c) {
                    best = Some((added, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("at least two groups");
        let (rb, mut members) = groups.remove(b);
        groups[a].0 = Rect::bounding([groups[a].0, rb]).expect("two rectangles");
        groups[a].1.append(&mut members);
    }
    let mut out = vec![0; obstacles.len()];
    for (g, (_, members)) in groups.iter().enumerate() {
        for &i in members {
            out[i] = g;
        }
    }
    out
}

/// Best incumbent over the pinned models obtained by grouping the
/// obstacles into `g = 1..=nc` groups with [`group_obstacles`]. Each pinned
/// model fixes the assignment to the grouping, each used cluster to its
/// group's bounding box and each unused cluster to an empty box at the
/// workspace's lower left corner.
pub fn grouped_start(
    form: &Formulation,
    scn: &Scenario,
    opts: &SolverOptions,
) -> Result<Option<Vec<f64>>, FormulationError> {
    let Mode::Clustered(nc) = form.layout.mode else {
        return Ok(None);
    };
    let lay = &form.layout;
    let no = lay.num_obstacles;
    let ws = scn.workspace;
    let opts = SolverOptions {
        polish_class: None,
        ..opts.clone()
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for g in 1..=nc.min(no.max(1)) {
        let group = group_obstacles(&scn.obstacles, g);
        let mut model = form.model.clone();
        let mut pin = |j: usize, v: f64| -> Result<(), FormulationError> {
            let h = model
                .handle_by_name(&model.vars()[j].name.clone())
                .expect("variable of this model");
            model.add_constraint(&[(h, 1.0)], Relation::Eq, v)?;
            Ok(())
        };
        for l in 0..nc {
            let members: Vec<Rect> = (0..no)
                .filter(|&i| group[i] == l)
                .map(|i| scn.obstacles[i])
                .collect();
            for i in 0..no {
                pin(
                    lay.assignment[l * no + i],
                    if group[i] == l { 1.0 } else { 0.0 },
                )?;
            }
            let r = Rect::bounding(members)
                .unwrap_or(Rect::new(ws.x_min, ws.y_min, ws.x_min, ws.y_min));
            for (&c, v) in lay.cluster_coords[l].iter().zip(<[f64; 4]>::from(r)) {
                pin(c, v)?;
            }
        }
        let out = BranchAndBound::new(&model, &opts).solve()?;
        if let (Some(v), Some(x)) = (out.objective_value, out.incumbent) {
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, x));
            }
        }
    }
    Ok(best.map(|(_, x)| x))
}

/// Lifts a point of a clustered formulation to one with more clusters.
/// Each extra cluster is empty and collapsed onto the workspace's lower
/// left corner, which every position clears through its `x ≥ c_xmax` side.
pub fn extend_clusters(
    from: &Formulation,
    x: &[f64],
    to: &Formulation,
    scn: &Scenario,
) -> Option<Vec<f64>> {
    let (Mode::Clustered(n0), Mode::Clustered(n1)) = (from.layout.mode, to.layout.mode) else {
        return None;
    };
    let (a, b) = (&from.layout, &to.layout);
    if n1 < n0
        || a.ns != b.ns
        || a.num_obstacles != b.num_obstacles
        || x.len() != from.model.num_vars()
    {
        return None;
    }
    let mut y = vec![0.0; to.model.num_vars()];
    let pairs = a
        .states
        .iter()
        .flatten()
        .zip(b.states.iter().flatten())
        .chain(a.controls.iter().flatten().zip(b.controls.iter().flatten()))
        .chain(a.effort.iter().flatten().zip(b.effort.iter().flatten()))
        .chain(a.arrival.iter().zip(&b.arrival))
        .chain(
            a.cluster_coords
                .iter()
                .flatten()
                .zip(b.cluster_coords.iter().flatten()),
        );
    for (&i, &j) in pairs {
        y[j] = x[i];
    }
    let no = a.num_obstacles;
    for l in 0..n0 {
        for i in 0..no {
            y[b.assignment[l * no + i]] = x[a.assignment[l * no + i]];
        }
    }
    let ws = scn.workspace;
    for l in n0..n1 {
        let c = b.cluster_coords[l];
        y[c[0]] = ws.x_min;
        y[c[1]] = ws.y_min;
        y[c[2]] = ws.x_min;
        y[c[3]] = ws.y_min;
    }
    for j in 0..a.ns + 1 {
        for l in 0..n1 {
            let target = b.cluster_bins[j * n1 + l];
            let values = if l < n0 {
                let src = a.cluster_bins[j * n0 + l];
                src.map(|k| x[k])
            } else {
                [1.0, 1.0, 0.0, 1.0]
            };
            for (k, v) in target.into_iter().zip(values) {
                y[k] = v;
            }
        }
    }
    Some(y)
}
