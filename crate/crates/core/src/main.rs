use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use meanshift_swarm::coverage::ShapeGrid;
use meanshift_swarm::geom::vec2;
use meanshift_swarm::io::{self, Backdrop, ParamEntry, TraceWriter};
use meanshift_swarm::precise::{DensityWeight, GoalSet};
use meanshift_swarm::presets::Preset;
use meanshift_swarm::swarm::{AlignmentUpdate, SwarmParams};
use meanshift_swarm::sim::{
    self, default_init_region, reference_placement, Rect, ScenarioConfig, ScenarioKind, Shape,
};
use meanshift_swarm::SwarmError;

#[derive(Parser)]
#[command(name = "msswarm", version, about = "Mean-shift shape formation for robot swarms")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Form a shape given as a list of goal points.
    Precise(RunArgs),
    /// Cover a shape given as a binary grid.
    Coverage(RunArgs),
    /// Cover a grid shape while the swarm follows a reference trajectory.
    Maneuver(RunArgs),
    /// Recompute summary metrics from a trace file.
    Metrics(MetricsArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "grid")]
    goals: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Robot count; precise runs default to one robot per goal.
    #[arg(long)]
    robots: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `key = value` file with parameter overrides.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    informed: usize,
    #[arg(long, default_value_t = sim::DEFAULT_MAX_STEPS)]
    steps: usize,
    /// Trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Write an SVG snapshot every N steps next to the trace.
    #[arg(long)]
    svg_every: Option<usize>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, conflicts_with = "grid")]
    goals: Option<PathBuf>,
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Precise(a) => run(ScenarioKind::Precise, a),
        Cmd::Coverage(a) => run(ScenarioKind::Coverage, a),
        Cmd::Maneuver(a) => run(ScenarioKind::Maneuver, a),
        Cmd::Metrics(a) => metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let diverged = e
                .chain()
                .any(|c| matches!(c.downcast_ref::<SwarmError>(), Some(SwarmError::Diverged { .. })));
            ExitCode::from(if diverged { 3 } else { 2 })
        }
    }
}

/// Scenario settings that live in the params file but are not controller gains.
#[derive(Default)]
struct Extras {
    preset: Option<Preset>,
    init: [Option<f64>; 4],
    anchor: [Option<f64>; 2],
    weight: Option<DensityWeight>,
    n_gray: Option<u32>,
    coverage_target: Option<f64>,
    feedforward: Option<bool>,
    alignment: Option<AlignmentUpdate>,
    fault_step: Option<usize>,
    fault_count: Option<usize>,
}

fn parse_extras(entries: &[ParamEntry]) -> anyhow::Result<Extras> {
    let mut x = Extras::default();
    for e in entries {
        let bad = || SwarmError::Parse {
            line: e.line,
            msg: format!("bad value {:?} for {}", e.value, e.key),
        };
        let num = || e.value.parse::<f64>().map_err(|_| bad());
        let int = || e.value.parse::<usize>().map_err(|_| bad());
        match e.key.as_str() {
            "preset" => x.preset = Some(Preset::parse(&e.value).ok_or_else(bad)?),
            "init_x0" => x.init[0] = Some(num()?),
            "init_y0" => x.init[1] = Some(num()?),
            "init_x1" => x.init[2] = Some(num()?),
            "init_y1" => x.init[3] = Some(num()?),
            "anchor_x" => x.anchor[0] = Some(num()?),
            "anchor_y" => x.anchor[1] = Some(num()?),
            "density_weight" => x.weight = Some(DensityWeight::parse(&e.value).ok_or_else(bad)?),
            "n_gray" => x.n_gray = Some(e.value.parse().map_err(|_| bad())?),
            "coverage_target" => x.coverage_target = Some(num()?),
            "frame_feedforward" => x.feedforward = Some(e.value.parse().map_err(|_| bad())?),
            "alignment" => x.alignment = Some(AlignmentUpdate::parse(&e.value).ok_or_else(bad)?),
            "fault_step" => x.fault_step = Some(int()?),
            "fault_count" => x.fault_count = Some(int()?),
            other => return Err(SwarmError::Config(format!("unknown parameter `{other}` (line {})", e.line)).into()),
        }
    }
    Ok(x)
}

fn load_settings(
    kind: ScenarioKind,
    path: Option<&Path>,
) -> anyhow::Result<(SwarmParams, Extras)> {
    let entries = match path {
        Some(p) => io::load_params(p).with_context(|| format!("reading {}", p.display()))?,
        None => Vec::new(),
    };
    let (preset_entries, rest): (Vec<_>, Vec<_>) = entries.into_iter().partition(|e| e.key == "preset");
    let mut extras = parse_extras(&preset_entries)?;
    let preset = extras.preset.unwrap_or(match kind {
        ScenarioKind::Precise => Preset::Fig4,
        ScenarioKind::Coverage => Preset::Fig5,
        ScenarioKind::Maneuver => Preset::Fig6,
    });
    let mut params = preset.params();
    let rest = io::apply_params(&mut params, rest)?;
    let more = parse_extras(&rest)?;
    if let Some(a) = more.alignment {
        params.alignment = a;
    }
    extras = Extras {
        preset: Some(preset),
        ..more
    };
    Ok((params, extras))
}

fn run(kind: ScenarioKind, a: RunArgs) -> anyhow::Result<()> {
    let (params, extras) = load_settings(kind, a.params.as_deref())?;
    let preset = extras.preset.expect("set by load_settings");
    let shape = match (kind, &a.goals, &a.grid) {
        (ScenarioKind::Precise, Some(p), _) => Shape::Goals(load_goals(p)?),
        (ScenarioKind::Precise, None, _) => return Err(SwarmError::Config("precise needs --goals".into()).into()),
        (_, _, Some(p)) => {
            let anchor = preset.anchor();
            let anchor = vec2(extras.anchor[0].unwrap_or(anchor.x), extras.anchor[1].unwrap_or(anchor.y));
            Shape::Grid(load_grid(p)?.with_anchor(anchor))
        }
        (_, _, None) => return Err(SwarmError::Config(format!("{} needs --grid", kind.name())).into()),
    };
    let trajectory = match &a.trajectory {
        Some(p) => Some(
            io::load_trajectory(p).with_context(|| format!("reading {}", p.display()))?,
        ),
        None => None,
    };
    let n_robot = match (&shape, a.robots) {
        (_, Some(n)) => n,
        (Shape::Goals(g), None) => g.len(),
        (Shape::Grid(_), None) => return Err(SwarmError::Config("--robots is required".into()).into()),
    };

    let mut config = ScenarioConfig::new(kind, n_robot, shape, params);
    config.seed = a.seed;
    config.max_steps = a.steps;
    config.n_informed = if kind == ScenarioKind::Maneuver { a.informed } else { 0 };
    config.trajectory = trajectory;
    config.n_gray = extras.n_gray;
    if let Some(w) = extras.weight {
        config.precise.weight = w;
    }
    if let Some(t) = extras.coverage_target {
        config.coverage_target = t;
    }
    if let Some(f) = extras.feedforward {
        config.frame_feedforward = f;
    }
    if let (Some(step), Some(count)) = (extras.fault_step, extras.fault_count) {
        config.fault_schedule = (0..count.min(n_robot)).map(|id| (step, id)).collect();
        config.stop_on_convergence = false;
    }
    let fallback = default_init_region(kind, &config.shape, n_robot, params.r_avoid, config.trajectory.as_ref());
    config.init_region = Rect::new(
        vec2(extras.init[0].unwrap_or(fallback.min.x), extras.init[1].unwrap_or(fallback.min.y)),
        vec2(extras.init[2].unwrap_or(fallback.max.x), extras.init[3].unwrap_or(fallback.max.y)),
    );
    config.validate()?;

    let mut writer = match &a.out {
        Some(p) => Some(TraceWriter::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        ))?),
        None => None,
    };
    let svg_base = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.name())));
    let grid_for_svg: Option<ShapeGrid> = match &config.shape {
        Shape::Grid(g) => {
            let mut g = g.clone();
            g.calibrate(n_robot, params.r_avoid)?;
            Some(g)
        }
        Shape::Goals(_) => None,
    };
    let mut io_error: Option<anyhow::Error> = None;
    let outcome = sim::run_scenario_with(&config, |step, t, snap| {
        if io_error.is_some() {
            return;
        }
        if let Some(w) = writer.as_mut() {
            for r in sim::trace_records(kind, step, t, snap) {
                if let Err(e) = w.write(&r) {
                    io_error = Some(e.into());
                    return;
                }
            }
        }
        if a.svg_every.is_some_and(|n| n > 0 && step % n == 0) {
            let backdrop = match (&config.shape, grid_for_svg.as_ref()) {
                (Shape::Goals(g), _) => Backdrop::Goals(g),
                (_, Some(g)) => {
                    let at = match &config.trajectory {
                        Some(tr) if kind == ScenarioKind::Maneuver => reference_placement(tr, t),
                        _ => g.static_placement(),
                    };
                    Backdrop::Grid(g, at)
                }
                _ => return,
            };
            let svg = io::render_svg(&backdrop, snap, params.r_avoid);
            let path = svg_base.with_file_name(format!(
                "{}_{step:06}.svg",
                svg_base.file_stem().and_then(|s| s.to_str()).unwrap_or("snapshot")
            ));
            if let Err(e) = std::fs::write(&path, svg) {
                io_error = Some(anyhow::Error::new(e).context(format!("writing {}", path.display())));
            }
        }
    })?;
    if let Some(e) = io_error {
        return Err(e);
    }
    if let Some(w) = writer {
        w.finish()?;
    }
    let summary = io::write_metrics(&outcome.metrics);
    match &a.metrics_out {
        Some(p) => std::fs::write(p, &summary).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{summary}"),
    }
    Ok(())
}

fn load_goals(p: &Path) -> anyhow::Result<GoalSet> {
    io::load_goals(p).with_context(|| format!("reading {}", p.display()))
}

fn load_grid(p: &Path) -> anyhow::Result<ShapeGrid> {
    io::load_grid(p).with_context(|| format!("reading {}", p.display()))
}

fn metrics(a: MetricsArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let trace = io::read_trace(&text)?;
    let kind = if a.goals.is_some() { ScenarioKind::Precise } else { ScenarioKind::Coverage };
    let (params, extras) = load_settings(kind, a.params.as_deref())?;
    let last_step = trace.iter().map(|r| r.step).max().unwrap_or(0);
    let last: Vec<_> = trace.iter().filter(|r| r.step == last_step).collect();
    let positions: Vec<_> = last.iter().map(|r| r.p).collect();
    println!("steps = {last_step}");
    println!("avg_distance = {}", sim::avg_distance(&trace, None));
    println!("final_min_pairwise_distance = {}", sim::min_pairwise_distance(&positions));
    if let Some(p) = &a.goals {
        let goals = load_goals(p)?;
        let snap: Vec<_> = last
            .iter()
            .map(|r| meanshift_swarm::swarm::RobotState::at(r.id, r.p))
            .collect();
        println!("final_convergence_rate = {}", sim::convergence_rate(&snap, &goals, params.r_avoid / 4.0));
    } else if let Some(p) = &a.grid {
        let preset = extras.preset.expect("set by load_settings");
        let anchor = vec2(
            extras.anchor[0].unwrap_or(preset.anchor().x),
            extras.anchor[1].unwrap_or(preset.anchor().y),
        );
        let n_robot = trace.iter().filter(|r| r.step == 0).count();
        let mut grid = load_grid(p)?.with_anchor(anchor);
        grid.calibrate(n_robot, params.r_avoid)?;
        println!(
            "final_coverage_rate = {}",
            sim::coverage_rate(&positions, &grid, &grid.static_placement())
        );
    }
    Ok(())
}
