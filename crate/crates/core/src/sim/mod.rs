//! Scenario harness: synchronous rounds, metrics, fault injection and the
//! centralized assignment baseline.

pub mod baseline;
pub mod hungarian;
pub mod metrics;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coverage::{coverage_command_with_drift, default_n_gray, grayscale_convert, GrayGrid, Placement, ShapeGrid};
use crate::error::{Result, SwarmError};
use crate::geom::{vec2, Vec2};
use crate::maneuver::{integrate_frame, negotiate_orientation, negotiate_position, ReferenceTrajectory, ShapeFrame};
use crate::precise::{precise_command, GoalSet, PreciseOptions};
use crate::swarm::{all_views, Hop, NeighborView, RobotState, SwarmParams};

pub use metrics::{avg_distance, convergence_rate, coverage_rate, detect_deadlock, min_pairwise_distance, Metrics};

/// Steps a rate must stay at target before the run counts as converged.
pub const CONVERGENCE_HOLD: usize = 50;
pub const DEADLOCK_SPEED: f64 = 1e-3;
pub const DEADLOCK_WINDOW: usize = 100;
pub const DEFAULT_MAX_STEPS: usize = 20_000;
/// Pairwise distances are only tracked once this much time has passed.
pub const SAFETY_WARMUP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Precise,
    Coverage,
    Maneuver,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Precise => "precise",
            ScenarioKind::Coverage => "coverage",
            ScenarioKind::Maneuver => "maneuver",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn centered(c: Vec2, half_w: f64, half_h: f64) -> Self {
        Rect::new(c - vec2(half_w, half_h), c + vec2(half_w, half_h))
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Goals(GoalSet),
    Grid(ShapeGrid),
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n_robot: usize,
    pub seed: u64,
    pub init_region: Rect,
    pub params: SwarmParams,
    pub shape: Shape,
    pub trajectory: Option<ReferenceTrajectory>,
    pub n_informed: usize,
    pub max_steps: usize,
    /// `(step, id)`: robot `id` is gone from step `step` on.
    pub fault_schedule: Vec<(usize, usize)>,
    pub precise: PreciseOptions,
    /// Gray levels for coverage guidance; `None` picks [`default_n_gray`].
    pub n_gray: Option<u32>,
    /// Coverage rate that counts as converged in coverage runs.
    pub coverage_target: f64,
    pub stop_on_convergence: bool,
    /// Adds the frame's own motion at the robot's position to the coverage
    /// command in maneuver runs.
    pub frame_feedforward: bool,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind, n_robot: usize, shape: Shape, params: SwarmParams) -> Self {
        ScenarioConfig {
            kind,
            n_robot,
            seed: 0,
            init_region: Rect::new(Vec2::zeros(), vec2(5.0, 5.0)),
            precise: PreciseOptions::for_params(&params),
            params,
            shape,
            trajectory: None,
            n_informed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            fault_schedule: Vec::new(),
            n_gray: None,
            coverage_target: 0.95,
            stop_on_convergence: true,
            frame_feedforward: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_robot == 0 {
            return Err(SwarmError::Config("n_robot must be > 0".into()));
        }
        let r = &self.init_region;
        if !(r.min.x <= r.max.x && r.min.y <= r.max.y) {
            return Err(SwarmError::Config("init region is empty".into()));
        }
        match (&self.kind, &self.shape) {
            (ScenarioKind::Precise, Shape::Goals(g)) => {
                if g.len() != self.n_robot {
                    return Err(SwarmError::Config(format!(
                        "precise formation needs one goal per robot ({} goals, {} robots)",
                        g.len(),
                        self.n_robot
                    )));
                }
            }
            (ScenarioKind::Precise, Shape::Grid(_)) => {
                return Err(SwarmError::Config("precise formation needs a goal list".into()))
            }
            (_, Shape::Goals(_)) => {
                return Err(SwarmError::Config(format!("{} formation needs a grid", self.kind.name())))
            }
            _ => {}
        }
        if self.kind == ScenarioKind::Maneuver {
            if self.trajectory.is_none() {
                return Err(SwarmError::Config("maneuver needs a reference trajectory".into()));
            }
            if self.n_informed == 0 || self.n_informed > self.n_robot {
                return Err(SwarmError::Config(format!(
                    "informed count must be in 1..={} (got {})",
                    self.n_robot, self.n_informed
                )));
            }
        }
        if let Some(&(_, id)) = self.fault_schedule.iter().find(|(_, id)| *id >= self.n_robot) {
            return Err(SwarmError::NoSuchRobot(id));
        }
        Ok(())
    }
}

/// Spacing used when sizing default init regions.
const INIT_SPACING: f64 = 0.6;
/// Gap between the shape and a default init region.
const INIT_GAP: f64 = 1.5;

/// Where robots start unless told otherwise: a square next to the shape
/// (left of a goal set, below a grid), or around the reference's start in
/// maneuver runs.
pub fn default_init_region(
    kind: ScenarioKind,
    shape: &Shape,
    n_robot: usize,
    r_avoid: f64,
    trajectory: Option<&ReferenceTrajectory>,
) -> Rect {
    let side = (n_robot as f64).sqrt() * INIT_SPACING;
    let bbox = |pts: &mut dyn Iterator<Item = Vec2>| {
        pts.fold((vec2(f64::MAX, f64::MAX), vec2(f64::MIN, f64::MIN)), |(lo, hi), p| {
            (lo.inf(&p), hi.sup(&p))
        })
    };
    match (kind, shape) {
        (ScenarioKind::Maneuver, _) => {
            let c = trajectory.map(|t| t.at(0.0).q).unwrap_or_else(Vec2::zeros);
            Rect::centered(c, side / 4.0, side / 4.0)
        }
        (_, Shape::Goals(g)) => {
            let (lo, hi) = bbox(&mut g.goals().iter().copied());
            let cy = (lo.y + hi.y) / 2.0;
            Rect::new(vec2(lo.x - INIT_GAP - side, cy - side / 2.0), vec2(lo.x - INIT_GAP, cy + side / 2.0))
        }
        (_, Shape::Grid(g)) => {
            let mut cal = g.clone();
            let _ = cal.calibrate(n_robot, r_avoid);
            let (lo, hi) = bbox(&mut cal.black_cells().map(|c| cal.position_in(c, &cal.static_placement())));
            let cx = (lo.x + hi.x) / 2.0;
            Rect::new(vec2(cx - side / 2.0, lo.y - INIT_GAP - side), vec2(cx + side / 2.0, lo.y - INIT_GAP))
        }
    }
}

/// One robot at one step as written to the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub t: f64,
    pub id: usize,
    pub p: Vec2,
    pub v: Vec2,
    pub h: Option<Hop>,
    pub q_o: Option<Vec2>,
    pub phi_o: Option<f64>,
}

/// Uniform positions in the init region, zero velocity, unknown hop count,
/// frame at the robot's own position. Informed robots are the lowest ids.
pub fn initial_state(config: &ScenarioConfig) -> Vec<RobotState> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let r = &config.init_region;
    (0..config.n_robot)
        .map(|id| {
            let x = sample(&mut rng, r.min.x, r.max.x);
            let y = sample(&mut rng, r.min.y, r.max.y);
            let mut s = RobotState::at(id, vec2(x, y));
            s.informed = config.kind == ScenarioKind::Maneuver && id < config.n_informed;
            s
        })
        .collect()
}

fn sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Drops the message fields the scenario's controller does not transmit.
pub fn restrict_view(mut view: NeighborView, kind: ScenarioKind) -> NeighborView {
    for n in &mut view.entries {
        match kind {
            ScenarioKind::Precise => {
                n.v = Vec2::zeros();
                n.frame = ShapeFrame::default();
            }
            ScenarioKind::Coverage => {
                n.h = Hop::Infinite;
                n.frame = ShapeFrame::default();
            }
            ScenarioKind::Maneuver => n.h = Hop::Infinite,
        }
    }
    view
}

/// The controller's part of one round: new robot states from a snapshot,
/// before any metrics are taken. `t` is the snapshot time.
pub struct Controller<'a> {
    config: &'a ScenarioConfig,
    grid: Option<ShapeGrid>,
    gray: Option<GrayGrid>,
}

impl<'a> Controller<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let (grid, gray) = match &config.shape {
            Shape::Grid(g) => {
                let mut g = g.clone();
                g.calibrate(config.n_robot, config.params.r_avoid)?;
                let n_gray = config.n_gray.unwrap_or_else(|| default_n_gray(&g));
                let gray = grayscale_convert(&g, n_gray);
                (Some(g), Some(gray))
            }
            Shape::Goals(_) => (None, None),
        };
        Ok(Controller { config, grid, gray })
    }

    /// The calibrated grid, for coverage and maneuver runs.
    pub fn grid(&self) -> Option<&ShapeGrid> {
        self.grid.as_ref()
    }

    pub fn step(&self, snapshot: &[RobotState], t: f64) -> Vec<RobotState> {
        let params = &self.config.params;
        let kind = self.config.kind;
        let views: Vec<NeighborView> = all_views(snapshot, params.r_sense)
            .into_iter()
            .map(|v| restrict_view(v, kind))
            .collect();
        snapshot
            .iter()
            .zip(&views)
            .map(|(r, view)| self.advance(r, view, t))
            .collect()
    }

    fn advance(&self, r: &RobotState, view: &NeighborView, t: f64) -> RobotState {
        let params = &self.config.params;
        let dt = params.dt;
        let mut next = r.clone();
        match &self.config.shape {
            Shape::Goals(goals) => {
                let c = precise_command(r.p, view, goals, params, &self.config.precise);
                next.v = c.v;
                next.h = c.hop.h;
            }
            Shape::Grid(_) => {
                let grid = self.grid.as_ref().expect("calibrated grid");
                let gray = self.gray.as_ref().expect("gray field");
                let (at, drift) = if self.config.kind == ScenarioKind::Maneuver {
                    next.frame = self.negotiate(r, view, t);
                    let f = &next.frame;
                    let drift = if self.config.frame_feedforward {
                        let arm = r.p - f.q_o;
                        f.nu_o + f.omega_o * vec2(-arm.y, arm.x)
                    } else {
                        Vec2::zeros()
                    };
                    (f.placement(), drift)
                } else {
                    (grid.static_placement(), Vec2::zeros())
                };
                next.v = coverage_command_with_drift(r.p, r.v, view, grid, gray, &at, drift, params).v;
            }
        }
        next.p = r.p + next.v * dt;
        next
    }

    fn negotiate(&self, r: &RobotState, view: &NeighborView, t: f64) -> ShapeFrame {
        let params = &self.config.params;
        let reference = self.config.trajectory.as_ref().map(|tr| tr.at(t));
        let pos_ref = reference.map(|s| (s.q, s.nu));
        let ang_ref = reference.map(|s| (s.phi, s.omega));
        // validate() guarantees a trajectory, so informed robots always have one
        let nu = negotiate_position(r.id, &r.frame, view, r.informed, pos_ref, params).unwrap_or(r.frame.nu_o);
        let omega =
            negotiate_orientation(r.id, &r.frame, view, r.informed, ang_ref, params).unwrap_or(r.frame.omega_o);
        integrate_frame(&r.frame, nu, omega, params.dt)
    }
}

/// Result of a run apart from the streamed trace.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: Metrics,
    pub final_state: Vec<RobotState>,
    /// Number of executed steps.
    pub steps: usize,
}

pub fn trace_records(kind: ScenarioKind, step: usize, t: f64, snapshot: &[RobotState]) -> Vec<TraceRecord> {
    snapshot
        .iter()
        .map(|r| TraceRecord {
            step,
            t,
            id: r.id,
            p: r.p,
            v: r.v,
            h: (kind == ScenarioKind::Precise).then_some(r.h),
            q_o: (kind == ScenarioKind::Maneuver).then_some(r.frame.q_o),
            phi_o: (kind == ScenarioKind::Maneuver).then_some(r.frame.phi_o),
        })
        .collect()
}

/// Runs a scenario and collects the full trace in memory.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(Vec<TraceRecord>, Metrics)> {
    let mut trace = Vec::new();
    let out = run_scenario_with(config, |step, t, snap| {
        trace.extend(trace_records(config.kind, step, t, snap));
    })?;
    Ok((trace, out.metrics))
}

/// Runs a scenario, handing every committed snapshot (step 0 included) to
/// `on_round` in order.
pub fn run_scenario_with<F>(config: &ScenarioConfig, mut on_round: F) -> Result<RunOutcome>
where
    F: FnMut(usize, f64, &[RobotState]),
{
    let ctl = Controller::new(config)?;
    let dt = config.params.dt;
    let mut state = initial_state(config);
    let mut faults = config.fault_schedule.clone();
    faults.sort();
    let mut tracker = metrics::Tracker::new(config, ctl.grid().cloned());
    let mut step = 0;
    loop {
        let t = step as f64 * dt;
        state.retain(|r| !faults.iter().any(|&(s, id)| s <= step && id == r.id));
        if let Some(r) = state.iter().find(|r| !(r.p.x.is_finite() && r.p.y.is_finite() && r.v.x.is_finite() && r.v.y.is_finite())) {
            return Err(SwarmError::Diverged { step, id: r.id });
        }
        on_round(step, t, &state);
        tracker.record(step, t, &state);
        if step >= config.max_steps || (config.stop_on_convergence && tracker.converged()) {
            break;
        }
        state = ctl.step(&state, t);
        step += 1;
    }
    Ok(RunOutcome {
        metrics: tracker.finish(),
        final_state: state,
        steps: step,
    })
}

/// Placement of the reference frame at time `t`.
pub fn reference_placement(tr: &ReferenceTrajectory, t: f64) -> Placement {
    let s = tr.at(t);
    Placement {
        origin: s.q,
        angle: s.phi,
    }
}
