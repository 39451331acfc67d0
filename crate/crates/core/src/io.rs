//! Scenario documents, trace files and SVG rendering.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::dynamics::{double_integrator_2d, zoh_discretize};
use crate::error::{IoError, ScenarioError};
use crate::formulation::{BigM, Rect, Scenario, StateBox};
use crate::simulator::Trace;

/// A parsed scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub scenario: Scenario,
    pub x0: [f64; 4],
    /// Suggested cluster count.
    pub nc: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
struct TerminalDoc {
    lo: [f64; 4],
    hi: [f64; 4],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct BigMDoc {
    obstacle: Option<f64>,
    cluster: Option<f64>,
    containment: Option<f64>,
    terminal: Option<f64>,
}

const KEYS: [&str; 13] = [
    "name",
    "workspace",
    "obstacles",
    "terminal_box",
    "x0",
    "Ts",
    "Ns",
    "gamma",
    "v_max",
    "a_max",
    "big_m",
    "Nc",
    "symmetry_breaking",
];

fn field<T: serde::de::DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &str,
) -> Result<T, ScenarioError> {
    let v = obj
        .get(key)
        .ok_or_else(|| ScenarioError::MissingField(key.into()))?;
    serde_json::from_value(v.clone()).map_err(|e| ScenarioError::BadField {
        field: key.into(),
        message: e.to_string(),
    })
}

fn optional<T: serde::de::DeserializeOwned>(
    obj: &Map<String, Value>,
    key: &str,
) -> Result<Option<T>, ScenarioError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(_) => field(obj, key).map(Some),
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| ScenarioError::Parse {
        line: 1,
        column: 1,
        message: "top level must be an object".into(),
    })?;
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(ScenarioError::BadField {
            field: k.clone(),
            message: "unknown key".into(),
        });
    }
    let name: Option<String> = optional(obj, "name")?;
    let workspace: [f64; 4] = field(obj, "workspace")?;
    let obstacles: Vec<[f64; 4]> = field(obj, "obstacles")?;
    let terminal: TerminalDoc = field(obj, "terminal_box")?;
    let x0: [f64; 4] = field(obj, "x0")?;
    let ts: f64 = field(obj, "Ts")?;
    let ns: usize = field(obj, "Ns")?;
    let gamma: f64 = field(obj, "gamma")?;
    let v_max: f64 = field(obj, "v_max")?;
    let a_max: f64 = field(obj, "a_max")?;
    let overrides: BigMDoc = optional(obj, "big_m")?.unwrap_or_default();
    let nc: Option<usize> = optional(obj, "Nc")?;
    let symmetry_breaking: bool = optional(obj, "symmetry_breaking")?.unwrap_or(false);

    for (i, o) in obstacles.iter().enumerate() {
        if o[0] > o[2] || o[1] > o[3] {
            return Err(ScenarioError::Validation(format!(
                "obstacle {} has min > max: {:?}",
                i + 1,
                o
            )));
        }
    }
    let workspace = Rect::from(workspace);
    let obstacles: Vec<Rect> = obstacles.into_iter().map(Rect::from).collect();
    let derived = BigM::derived(&workspace, &obstacles);
    let big_m = BigM {
        obstacle: overrides.obstacle.unwrap_or(derived.obstacle),
        cluster: overrides.cluster.unwrap_or(derived.cluster),
        containment: overrides.containment.unwrap_or(derived.containment),
        terminal: overrides.terminal.unwrap_or(derived.terminal),
    };
    let dynamics = zoh_discretize(&double_integrator_2d(), ts)?;
    let scenario = Scenario {
        dynamics,
        workspace,
        obstacles,
        terminal: StateBox {
            lo: terminal.lo,
            hi: terminal.hi,
        },
        v_max,
        a_max,
        gamma,
        ns,
        big_m,
        symmetry_breaking,
    };
    scenario
        .validate()
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    if nc == Some(0) {
        return Err(ScenarioError::BadField {
            field: "Nc".into(),
            message: "must be at least 1".into(),
        });
    }
    scenario
        .check_initial_state(&x0)
        .map_err(|e| ScenarioError::Validation(e.to_string()))?;
    Ok(ScenarioFile {
        name,
        scenario,
        x0,
        nc,
    })
}

/// Serialises a scenario back to the document format, keys in canonical
/// order and one rectangle per line. Big-M constants are written only when
/// they differ from the derived defaults.
pub fn scenario_to_json(file: &ScenarioFile) -> String {
    let s = &file.scenario;
    let num = |v: f64| serde_json::to_string(&v).expect("finite number");
    let arr = |v: &[f64]| {
        format!(
            "[{}]",
            v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
        )
    };
    let rect = |r: &Rect| arr(&<[f64; 4]>::from(*r));
    let mut fields: Vec<(&str, String)> = Vec::new();
    if let Some(n) = &file.name {
        fields.push(("name", serde_json::to_string(n).expect("string")));
    }
    fields.push(("workspace", rect(&s.workspace)));
    let obstacles = if s.obstacles.is_empty() {
        "[]".to_string()
    } else {
        let rows: Vec<String> = s
            .obstacles
            .iter()
            .map(|o| format!("    {}", rect(o)))
            .collect();
        format!("[\n{}\n  ]", rows.join(",\n"))
    };
    fields.push(("obstacles", obstacles));
    fields.push((
        "terminal_box",
        format!(
            "{{\n    \"lo\": {},\n    \"hi\": {}\n  }}",
            arr(&s.terminal.lo),
            arr(&s.terminal.hi)
        ),
    ));
    fields.push(("x0", arr(&file.x0)));
    fields.push(("Ts", num(s.dynamics.ts)));
    fields.push(("Ns", s.ns.to_string()));
    fields.push(("gamma", num(s.gamma)));
    fields.push(("v_max", num(s.v_max)));
    fields.push(("a_max", num(s.a_max)));
    let derived = BigM::derived(&s.workspace, &s.obstacles);
    if s.big_m != derived {
        let pairs = [
            ("obstacle", s.big_m.obstacle, derived.obstacle),
            ("cluster", s.big_m.cluster, derived.cluster),
            ("containment", s.big_m.containment, derived.containment),
            ("terminal", s.big_m.terminal, derived.terminal),
        ];
        let inner: Vec<String> = pairs
            .iter()
            .filter(|(_, v, d)| v != d)
            .map(|(k, v, _)| format!("\"{k}\": {}", num(*v)))
            .collect();
        fields.push(("big_m", format!("{{{}}}", inner.join(", "))));
    }
    if let Some(nc) = file.nc {
        fields.push(("Nc", nc.to_string()));
    }
    if s.symmetry_breaking {
        fields.push(("symmetry_breaking", "true".into()));
    }
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("  \"{k}\": {v}"))
        .collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

/// Shape of a random obstacle field.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleField {
    pub count: usize,
    /// Region the obstacles are drawn in.
    pub region: Rect,
    /// Side lengths are drawn uniformly from this range.
    pub side: (f64, f64),
    /// Minimum clearance between obstacles.
    pub gap: f64,
    /// Rectangles no obstacle may overlap.
    pub keep_clear: Vec<Rect>,
}

/// Draws non-overlapping axis-aligned obstacles by rejection sampling.
/// Returns fewer than `count` rectangles only if 10 000 consecutive draws
/// are rejected.
pub fn generate_obstacles(field: &ObstacleField, seed: u64) -> Vec<Rect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Rect> = Vec::with_capacity(field.count);
    let r = field.region;
    let mut misses = 0;
    while out.len() < field.count && misses < 10_000 {
        let w = rng.random_range(field.side.0..=field.side.1).min(r.width());
        let h = rng
            .random_range(field.side.0..=field.side.1)
            .min(r.height());
        let x = rng.random_range(r.x_min..=r.x_max - w);
        let y = rng.random_range(r.y_min..=r.y_max - h);
        // 0.1 grid
        let snap = |v: f64| (v * 10.0).round() / 10.0;
        let cand = Rect::new(snap(x), snap(y), snap(x + w), snap(y + h));
        let grown = Rect::new(
            cand.x_min - field.gap,
            cand.y_min - field.gap,
            cand.x_max + field.gap,
            cand.y_max + field.gap,
        );
        let clash = out.iter().any(|o| o.interiors_overlap(&grown))
            || field.keep_clear.iter().any(|k| k.interiors_overlap(&grown))
            || !r.contains_rect(&cand, 1e-9);
        if clash {
            misses += 1;
        } else {
            misses = 0;
            out.push(cand);
        }
    }
    out
}

pub const TRACE_HEADER: [&str; 12] = [
    "k",
    "r_x",
    "v_x",
    "r_y",
    "v_y",
    "a_x",
    "a_y",
    "J_star",
    "J_hat_next",
    "solve_time",
    "nodes",
    "assignment_changed",
];

/// Numeric content of one trace CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub state: [f64; 4],
    pub control: [f64; 2],
    pub j_star: f64,
    pub j_hat_next: f64,
    pub solve_time: f64,
    pub nodes: u64,
    pub assignment_changed: bool,
}

fn exact(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per executed step, floats with 17 significant digits.
pub fn write_trace(trace: &Trace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory write");
    for s in &trace.steps {
        let mut rec = vec![s.k.to_string()];
        rec.extend(s.state.iter().map(|&v| exact(v)));
        rec.extend(s.applied_control.iter().map(|&v| exact(v)));
        rec.push(exact(s.j_star));
        rec.push(exact(s.j_hat_next));
        rec.push(exact(s.solve_time));
        rec.push(s.nodes_explored.to_string());
        rec.push(s.assignment_changed.to_string());
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Parses a document produced by [`write_trace`].
pub fn read_trace(text: &str) -> Result<Vec<TraceRow>, IoError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(IoError::TraceRow {
            row: 0,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |message: String| IoError::TraceRow { row, message };
        let num = |c: usize| -> Result<f64, IoError> {
            rec[c]
                .parse::<f64>()
                .map_err(|e| bad(format!("column {}: {e}", TRACE_HEADER[c])))
        };
        out.push(TraceRow {
            k: rec[0].parse().map_err(|e| bad(format!("column k: {e}")))?,
            state: [num(1)?, num(2)?, num(3)?, num(4)?],
            control: [num(5)?, num(6)?],
            j_star: num(7)?,
            j_hat_next: num(8)?,
            solve_time: num(9)?,
            nodes: rec[10]
                .parse()
                .map_err(|e| bad(format!("column nodes: {e}")))?,
            assignment_changed: rec[11]
                .parse()
                .map_err(|e| bad(format!("column assignment_changed: {e}")))?,
        });
    }
    Ok(out)
}

pub fn trace_to_json(trace: &Trace) -> String {
    serde_json::to_string_pretty(trace).expect("trace is serialisable")
}

pub fn trace_from_json(text: &str) -> Result<Trace, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Pixels per meter.
    pub scale: f64,
    /// Step whose cluster rectangles are drawn.
    pub cluster_step: Option<usize>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            scale: 40.0,
            cluster_step: None,
        }
    }
}

const MARGIN: f64 = 10.0;

/// Workspace, obstacles (filled), terminal box, executed path with step
/// markers and, optionally, one step's clusters (outlined). Element ids
/// are `workspace`, `obstacle-{i}`, `terminal`, `path`, `state-{k}` and
/// `cluster-{l}`, all one-based except `k`.
pub fn render_svg(scn: &Scenario, trace: &Trace, opts: &SvgOptions) -> Result<String, IoError> {
    let ws = scn.workspace;
    let s = opts.scale;
    let px = |x: f64| MARGIN + (x - ws.x_min) * s;
    let py = |y: f64| MARGIN + (ws.y_max - y) * s;
    let rect = |out: &mut String, id: &str, r: &Rect, style: &str| {
        let (x0, x1) = (r.x_min.min(r.x_max), r.x_min.max(r.x_max));
        let (y0, y1) = (r.y_min.min(r.y_max), r.y_min.max(r.y_max));
        let _ = writeln!(
            out,
            r#"  <rect id="{id}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
            px(x0),
            py(y1),
            (x1 - x0) * s,
            (y1 - y0) * s
        );
    };
    let clusters = match opts.cluster_step {
        None => None,
        Some(k) if k < trace.steps.len() => trace.steps[k].cluster_info.as_ref(),
        Some(k) => {
            return Err(IoError::StepOutOfRange {
                step: k,
                len: trace.steps.len(),
            })
        }
    };
    let width = ws.width() * s + 2.0 * MARGIN;
    let height = ws.height() * s + 2.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    rect(
        &mut out,
        "workspace",
        &ws,
        r##"fill="#ffffff" stroke="#000000" stroke-width="1""##,
    );
    for (i, o) in scn.obstacles.iter().enumerate() {
        rect(
            &mut out,
            &format!("obstacle-{}", i + 1),
            o,
            r##"fill="#8b5a2b" stroke="none""##,
        );
    }
    rect(
        &mut out,
        "terminal",
        &scn.terminal.position_rect(),
        r##"fill="#7fd17f" fill-opacity="0.6" stroke="#2e8b57" stroke-width="1""##,
    );
    if let Some(info) = clusters {
        for (l, c) in info.clusters.iter().enumerate() {
            rect(
                &mut out,
                &format!("cluster-{}", l + 1),
                c,
                r##"fill="none" stroke="#1f4fd1" stroke-width="2" stroke-dasharray="6 3""##,
            );
        }
    }
    if !trace.steps.is_empty() {
        let states = trace.states();
        let points: Vec<String> = states
            .iter()
            .map(|p| format!("{:.3},{:.3}", px(p[0]), py(p[2])))
            .collect();
        let _ = writeln!(
            out,
            r##"  <polyline id="path" points="{}" fill="none" stroke="#d12f1f" stroke-width="2"/>"##,
            points.join(" ")
        );
        for (k, p) in states.iter().enumerate() {
            let _ = writeln!(
                out,
                r##"  <circle id="state-{k}" cx="{:.3}" cy="{:.3}" r="3" fill="#d12f1f"/>"##,
                px(p[0]),
                py(p[2])
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}
