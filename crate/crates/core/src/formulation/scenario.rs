use serde::{Deserialize, Serialize};

use crate::dynamics::LtiDiscrete;
use crate::error::FormulationError;

use super::plan::PLAN_TOL;

/// Axis-aligned rectangle in the position plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for Rect {
    fn from(v: [f64; 4]) -> Self {
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x_min, r.y_min, r.x_max, r.y_max]
    }
}

impl Rect {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn is_ordered(&self) -> bool {
        self.x_min <= self.x_max && self.y_min <= self.y_max
    }

    pub fn is_finite(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Point lies in the open interior shrunk by `tol` on every side.
    pub fn contains_interior(&self, x: f64, y: f64, tol: f64) -> bool {
        x > self.x_min + tol && x < self.x_max - tol && y > self.y_min + tol && y < self.y_max - tol
    }

    pub fn contains_point(&self, x: f64, y: f64, tol: f64) -> bool {
        x >= self.x_min - tol
            && x <= self.x_max + tol
            && y >= self.y_min - tol
            && y <= self.y_max + tol
    }

    /// `other ⊆ self` up to `tol`.
    pub fn contains_rect(&self, other: &Rect, tol: f64) -> bool {
        other.x_min >= self.x_min - tol
            && other.y_min >= self.y_min - tol
            && other.x_max <= self.x_max + tol
            && other.y_max <= self.y_max + tol
    }

    /// Open interiors intersect.
    pub fn interiors_overlap(&self, other: &Rect) -> bool {
        self.x_min < other.x_max
            && other.x_min < self.x_max
            && self.y_min < other.y_max
            && other.y_min < self.y_max
    }

    pub fn bounding(rects: impl IntoIterator<Item = Rect>) -> Option<Rect> {
        rects.into_iter().reduce(|a, b| {
            Rect::new(
                a.x_min.min(b.x_min),
                a.y_min.min(b.y_min),
                a.x_max.max(b.x_max),
                a.y_max.max(b.y_max),
            )
        })
    }
}

/// Box in state space, ordering `[r_x, v_x, r_y, v_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl StateBox {
    pub fn contains(&self, x: &[f64; 4], tol: f64) -> bool {
        (0..4).all(|c| x[c] >= self.lo[c] - tol && x[c] <= self.hi[c] + tol)
    }

    pub fn position_rect(&self) -> Rect {
        Rect::new(self.lo[0], self.lo[2], self.hi[0], self.hi[2])
    }
}

/// Big-M constants of the avoidance, containment and terminal rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigM {
    /// Obstacle avoidance rows.
    pub obstacle: f64,
    /// Cluster avoidance rows.
    pub cluster: f64,
    /// Cluster-obstacle containment rows.
    pub containment: f64,
    /// Terminal-set position rows (velocity rows use `2·v_max`).
    pub terminal: f64,
}

impl BigM {
    /// Smallest constants that leave every relaxed row inactive over the
    /// workspace: span plus largest obstacle side for avoidance and
    /// terminal rows, plain span for containment.
    pub fn derived(workspace: &Rect, obstacles: &[Rect]) -> Self {
        let span = workspace.width().max(workspace.height());
        let largest = obstacles
            .iter()
            .map(|o| o.width().max(o.height()))
            .fold(0.0, f64::max);
        let m = span + largest;
        Self {
            obstacle: m,
            cluster: m,
            containment: span,
            terminal: m,
        }
    }
}

/// A full planning instance (everything except the current state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub dynamics: LtiDiscrete,
    pub workspace: Rect,
    pub obstacles: Vec<Rect>,
    pub terminal: StateBox,
    pub v_max: f64,
    pub a_max: f64,
    pub gamma: f64,
    /// Maximal horizon; arrival may happen at any step `1..=ns+1`.
    pub ns: usize,
    pub big_m: BigM,
    /// Orders cluster left edges (off by default).
    pub symmetry_breaking: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), FormulationError> {
        let bad = |m: String| Err(FormulationError::InvalidScenario(m));
        if self.dynamics.a.shape() != (4, 4) || self.dynamics.b.shape() != (4, 2) {
            return bad("dynamics must have 4 states and 2 inputs".into());
        }
        if !self.workspace.is_finite() || !self.workspace.is_ordered() {
            return bad("workspace must be a finite, ordered rectangle".into());
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_finite() || !o.is_ordered() {
                return bad(format!("obstacle {} has min > max", i + 1));
            }
            if !self.workspace.contains_rect(o, 0.0) {
                return bad(format!("obstacle {} is not inside the workspace", i + 1));
            }
        }
        let t = &self.terminal;
        if (0..4).any(|c| !t.lo[c].is_finite() || !t.hi[c].is_finite() || t.lo[c] > t.hi[c]) {
            return bad("terminal box must be finite with lo <= hi".into());
        }
        let q = t.position_rect();
        if let Some(i) = self.obstacles.iter().position(|o| o.interiors_overlap(&q)) {
            return bad(format!("terminal box overlaps obstacle {}", i + 1));
        }
        if self.ns < 1 {
            return bad("maximal horizon must be at least 1".into());
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be finite and nonnegative".into());
        }
        if !(self.v_max > 0.0
            && self.v_max.is_finite()
            && self.a_max > 0.0
            && self.a_max.is_finite())
        {
            return bad("velocity and acceleration limits must be positive".into());
        }
        let m = self.big_m;
        if [m.obstacle, m.cluster, m.containment, m.terminal]
            .iter()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return bad("big-M constants must be positive".into());
        }
        Ok(())
    }

    pub fn num_obstacles(&self) -> usize {
        self.obstacles.len()
    }

    /// Checks that `x0` is finite, inside the workspace and outside every
    /// obstacle interior, both up to [`PLAN_TOL`].
    pub fn check_initial_state(&self, x0: &[f64; 4]) -> Result<(), FormulationError> {
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(FormulationError::NonFiniteState);
        }
        if !self.workspace.contains_point(x0[0], x0[2], PLAN_TOL) {
            return Err(FormulationError::OutsideWorkspace(*x0));
        }
        if let Some(i) = self
            .obstacles
            .iter()
            .position(|o| o.contains_interior(x0[0], x0[2], PLAN_TOL))
        {
            return Err(FormulationError::InsideObstacle {
                x: x0[0],
                y: x0[2],
                obstacle: i + 1,
            });
        }
        Ok(())
    }
}
