use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use clustermpc::formulation::{
    build, count_binaries, decode_plan, grouped_start, ASSIGNMENT_PRIORITY,
};
use clustermpc::io::{
    generate_obstacles, load_scenario, render_svg, trace_from_json, trace_to_json, write_trace,
    ObstacleField, ScenarioFile, SvgOptions,
};
use clustermpc::{
    run_receding_horizon, BranchAndBound, MilpStatus, Mode, Rect, SimOptions, SolverOptions,
    Termination, Trace,
};

mod report;

use report::{BenchReport, BenchRow};

const EXIT_BAD_INPUT: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_SIM_FAILED: u8 = 4;
const EXIT_BENCH_FAILED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "clustermpc",
    version,
    about = "Variable-horizon MILP trajectory planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the open-loop problem once from the scenario's initial state.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mode: ModeArgs,
        /// Write the plan as JSON.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Run the receding-horizon loop.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        /// Trace CSV.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Full trace as JSON (input of `render`).
        #[arg(long)]
        trace_json_out: Option<PathBuf>,
        #[arg(long)]
        svg_out: Option<PathBuf>,
        /// Step whose clusters are drawn in the SVG.
        #[arg(long)]
        snapshot_step: Option<usize>,
        /// Solve every step cold instead of seeding it with the previous plan.
        #[arg(long)]
        no_warm_start: bool,
    },
    /// Run the loop once per mode and tabulate time, cost, binaries and nodes.
    Benchmark {
        #[command(flatten)]
        common: Common,
        /// Comma-separated modes: `unclustered` or a cluster count.
        #[arg(long, default_value = "unclustered,2,3", value_delimiter = ',')]
        modes: Vec<String>,
        #[arg(long, default_value_t = 200)]
        max_steps: usize,
        /// Report JSON.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Draw a scenario and, optionally, a trace written by `simulate`.
    Render {
        scenario: PathBuf,
        /// Trace JSON from `simulate --trace-json-out`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        snapshot_step: Option<usize>,
        #[arg(long)]
        svg_out: PathBuf,
        /// Pixels per meter.
        #[arg(long, default_value_t = 40.0)]
        scale: f64,
    },
}

#[derive(Args)]
struct Common {
    scenario: PathBuf,
    /// Relative optimality gap.
    #[arg(long)]
    gap: Option<f64>,
    /// Branch-and-bound node limit per solve.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Wall-clock limit per solve in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Replace the obstacles by a random field drawn with this seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Obstacle count of the random field (default: the document's count).
    #[arg(long, requires = "seed")]
    obstacles: Option<usize>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ModeArgs {
    #[arg(long)]
    unclustered: bool,
    #[arg(long, value_name = "N")]
    clusters: Option<usize>,
}

impl ModeArgs {
    fn mode(&self) -> Mode {
        match self.clusters {
            Some(n) => Mode::Clustered(n),
            None => Mode::Unclustered,
        }
    }
}

/// An error that maps to a specific exit code.
struct Exit(u8, anyhow::Error);

trait ExitContext<T> {
    fn exit(self, code: u8) -> std::result::Result<T, Exit>;
}

impl<T, E: Into<anyhow::Error>> ExitContext<T> for std::result::Result<T, E> {
    fn exit(self, code: u8) -> std::result::Result<T, Exit> {
        self.map_err(|e| Exit(code, e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            common,
            mode,
            report_out,
        } => cmd_solve(&common, mode.mode(), report_out.as_deref()),
        Command::Simulate {
            common,
            mode,
            max_steps,
            trace_out,
            trace_json_out,
            svg_out,
            snapshot_step,
            no_warm_start,
        } => {
            let sim = SimOptions {
                max_steps,
                warm_start: !no_warm_start,
                ..SimOptions::default()
            };
            let outputs = SimOutputs {
                trace_out: trace_out.as_deref(),
                trace_json_out: trace_json_out.as_deref(),
                svg_out: svg_out.as_deref(),
                snapshot_step,
            };
            cmd_simulate(&common, mode.mode(), &sim, &outputs)
        }
        Command::Benchmark {
            common,
            modes,
            max_steps,
            report_out,
        } => cmd_benchmark(&common, &modes, max_steps, report_out.as_deref()),
        Command::Render {
            scenario,
            trace,
            snapshot_step,
            svg_out,
            scale,
        } => cmd_render(&scenario, trace.as_deref(), snapshot_step, &svg_out, scale),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn load(common: &Common) -> Result<ScenarioFile> {
    let text = fs::read_to_string(&common.scenario)
        .with_context(|| format!("reading {}", common.scenario.display()))?;
    let mut file =
        load_scenario(&text).with_context(|| format!("loading {}", common.scenario.display()))?;
    if let Some(seed) = common.seed {
        let scn = &mut file.scenario;
        let x0 = file.x0;
        let field = ObstacleField {
            count: common.obstacles.unwrap_or(scn.obstacles.len()),
            region: scn.workspace,
            side: (0.4, 1.2),
            gap: 0.2,
            keep_clear: vec![
                Rect::new(x0[0] - 1.0, x0[2] - 1.0, x0[0] + 1.0, x0[2] + 1.0),
                scn.terminal.position_rect(),
            ],
        };
        scn.obstacles = generate_obstacles(&field, seed);
        scn.big_m = clustermpc::BigM::derived(&scn.workspace, &scn.obstacles);
        scn.validate().context("generated scenario")?;
    }
    Ok(file)
}

fn solver_options(common: &Common) -> Result<SolverOptions> {
    let mut opts = SolverOptions::default();
    if let Some(g) = common.gap {
        opts.rel_gap = g;
    }
    if let Some(n) = common.node_limit {
        opts.node_limit = n;
    }
    opts.time_limit = common.time_limit;
    Ok(opts)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(
    common: &Common,
    mode: Mode,
    report_out: Option<&Path>,
) -> std::result::Result<u8, Exit> {
    let file = load(common).exit(EXIT_BAD_INPUT)?;
    let mut opts = solver_options(common).exit(EXIT_BAD_INPUT)?;
    let scn = &file.scenario;
    let form = build(scn, &file.x0, mode).exit(EXIT_BAD_INPUT)?;
    let start = Instant::now();
    let seed = if matches!(mode, Mode::Clustered(_)) {
        opts.polish_class = Some(ASSIGNMENT_PRIORITY);
        grouped_start(&form, scn, &opts).exit(EXIT_BAD_INPUT)?
    } else {
        None
    };
    let mut bnb = BranchAndBound::new(&form.model, &opts);
    if let Some(x) = &seed {
        bnb = bnb.warm_start(x);
    }
    let out = bnb.solve().exit(EXIT_BAD_INPUT)?;
    let elapsed = start.elapsed().as_secs_f64();
    let binaries = count_binaries(
        mode,
        clustermpc::formulation::avoidance_steps(scn.ns),
        scn.obstacles.len(),
    );
    println!("mode: {mode}");
    println!("status: {:?}", out.status);
    println!("avoidance_binaries: {binaries}");
    println!("model_binaries: {}", form.model.num_binaries());
    println!("solve_time: {elapsed:.3}");
    println!("nodes: {}", out.nodes_explored);
    println!("best_bound: {}", out.best_bound);
    if out.has_incumbent() {
        let plan = decode_plan(&form, &out, scn).exit(EXIT_BAD_INPUT)?;
        println!("J_star: {}", out.objective_value.unwrap_or(plan.cost));
        println!("arrival_step: {}", plan.arrival_step);
        if let Some(info) = &plan.clusters {
            for (l, r) in info.clusters.iter().enumerate() {
                let members: Vec<usize> = (0..scn.obstacles.len())
                    .filter(|&i| info.assignment[l][i])
                    .map(|i| i + 1)
                    .collect();
                println!(
                    "cluster {}: [{:.3}, {:.3}, {:.3}, {:.3}] obstacles {:?}",
                    l + 1,
                    r.x_min,
                    r.y_min,
                    r.x_max,
                    r.y_max,
                    members
                );
            }
        }
        if let Some(path) = report_out {
            let json = serde_json::to_string_pretty(&plan).exit(EXIT_BAD_INPUT)?;
            write(path, &json).exit(EXIT_BAD_INPUT)?;
        }
    }
    Ok(match out.status {
        MilpStatus::Optimal => 0,
        MilpStatus::Infeasible => EXIT_INFEASIBLE,
        MilpStatus::LimitReached => EXIT_LIMIT,
        MilpStatus::Unbounded => EXIT_BAD_INPUT,
    })
}

struct SimOutputs<'a> {
    trace_out: Option<&'a Path>,
    trace_json_out: Option<&'a Path>,
    svg_out: Option<&'a Path>,
    snapshot_step: Option<usize>,
}

fn cmd_simulate(
    common: &Common,
    mode: Mode,
    sim: &SimOptions,
    out: &SimOutputs<'_>,
) -> std::result::Result<u8, Exit> {
    let file = load(common).exit(EXIT_BAD_INPUT)?;
    let opts = solver_options(common).exit(EXIT_BAD_INPUT)?;
    let scn = &file.scenario;
    let trace = run_receding_horizon(scn, &file.x0, mode, &opts, sim).exit(EXIT_BAD_INPUT)?;
    if let Some(path) = out.trace_out {
        write(path, &write_trace(&trace)).exit(EXIT_BAD_INPUT)?;
    }
    if let Some(path) = out.trace_json_out {
        write(path, &trace_to_json(&trace)).exit(EXIT_BAD_INPUT)?;
    }
    if let Some(path) = out.svg_out {
        let svg = render_svg(
            scn,
            &trace,
            &SvgOptions {
                cluster_step: out.snapshot_step,
                ..SvgOptions::default()
            },
        )
        .exit(EXIT_BAD_INPUT)?;
        write(path, &svg).exit(EXIT_BAD_INPUT)?;
    }
    println!(
        "mode={} steps={} closed_loop_cost={:.6} total_solve_time={:.3} nodes={} termination={}",
        mode,
        trace.steps.len(),
        trace.closed_loop_cost,
        trace.total_solve_time,
        trace.total_nodes(),
        termination_text(&trace.termination)
    );
    Ok(if trace.reached_target {
        0
    } else {
        EXIT_SIM_FAILED
    })
}

fn termination_text(t: &Termination) -> String {
    match t {
        Termination::ReachedTarget => "reached-target".into(),
        Termination::MaxSteps => "max-steps".into(),
        Termination::Infeasible { k } => format!("infeasible@{k}"),
        Termination::NoIncumbent { k } => format!("no-incumbent@{k}"),
        Termination::InvalidPlan { k, .. } => format!("invalid-plan@{k}"),
    }
}

fn parse_mode(text: &str) -> Result<Mode> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("unclustered") || t.eq_ignore_ascii_case("u") {
        return Ok(Mode::Unclustered);
    }
    let n: usize = t
        .parse()
        .with_context(|| format!("mode {t:?} is neither `unclustered` nor a cluster count"))?;
    anyhow::ensure!(n > 0, "cluster count must be positive");
    Ok(Mode::Clustered(n))
}

fn cmd_benchmark(
    common: &Common,
    modes: &[String],
    max_steps: usize,
    report_out: Option<&Path>,
) -> std::result::Result<u8, Exit> {
    let file = load(common).exit(EXIT_BAD_INPUT)?;
    let opts = solver_options(common).exit(EXIT_BAD_INPUT)?;
    let modes: Vec<Mode> = modes
        .iter()
        .map(|m| parse_mode(m))
        .collect::<Result<_>>()
        .exit(EXIT_BAD_INPUT)?;
    let scn = &file.scenario;
    let sim = SimOptions {
        max_steps,
        ..SimOptions::default()
    };
    let rows: Vec<BenchRow> = modes
        .iter()
        .map(|&mode| {
            let binaries = count_binaries(
                mode,
                clustermpc::formulation::avoidance_steps(scn.ns),
                scn.obstacles.len(),
            );
            match run_receding_horizon(scn, &file.x0, mode, &opts, &sim) {
                Ok(trace) => BenchRow::from_trace(&trace, binaries),
                Err(e) => BenchRow::failed(mode, binaries, e.to_string()),
            }
        })
        .collect();
    let report = BenchReport {
        scenario: file
            .name
            .clone()
            .unwrap_or_else(|| common.scenario.display().to_string()),
        options: opts,
        rows,
    };
    print!("{}", report.table());
    if let Some(path) = report_out {
        write(path, &report.to_json()).exit(EXIT_BAD_INPUT)?;
    }
    Ok(if report.all_succeeded() {
        0
    } else {
        EXIT_BENCH_FAILED
    })
}

fn cmd_render(
    scenario: &Path,
    trace: Option<&Path>,
    snapshot_step: Option<usize>,
    svg_out: &Path,
    scale: f64,
) -> std::result::Result<u8, Exit> {
    let text = fs::read_to_string(scenario)
        .with_context(|| format!("reading {}", scenario.display()))
        .exit(EXIT_BAD_INPUT)?;
    let file = load_scenario(&text).exit(EXIT_BAD_INPUT)?;
    let trace = match trace {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .exit(EXIT_BAD_INPUT)?;
            trace_from_json(&text).exit(EXIT_BAD_INPUT)?
        }
        None => Trace::empty(Mode::Unclustered, file.x0),
    };
    let svg = render_svg(
        &file.scenario,
        &trace,
        &SvgOptions {
            scale,
            cluster_step: snapshot_step,
        },
    )
    .exit(EXIT_BAD_INPUT)?;
    write(svg_out, &svg).exit(EXIT_BAD_INPUT)?;
    Ok(0)
}
