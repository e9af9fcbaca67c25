//! Run metrics: convergence and coverage rates, traveled distance, safety
//! margin and deadlock detection.

use std::collections::BTreeMap;

use super::{reference_placement, ScenarioConfig, ScenarioKind, Shape, TraceRecord};
use super::{CONVERGENCE_HOLD, DEADLOCK_SPEED, DEADLOCK_WINDOW, SAFETY_WARMUP};
use crate::coverage::{Cell, Placement, ShapeGrid};
use crate::geom::Vec2;
use crate::maneuver::ReferenceTrajectory;
use crate::precise::GoalSet;
use crate::swarm::RobotState;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    /// Precise runs only; one entry per committed snapshot.
    pub convergence_rate_series: Vec<f64>,
    /// Start of the first window in which the run's rate stayed at target.
    pub convergence_time: Option<f64>,
    /// Coverage and maneuver runs only; maneuver runs measure in the reference frame.
    pub coverage_rate_series: Vec<f64>,
    pub avg_distance: f64,
    /// Smallest pairwise distance seen after the warmup; infinite if never measured.
    pub min_pairwise_distance: f64,
    pub deadlock: bool,
    /// Maneuver runs: largest pairwise distance between frame position estimates.
    pub frame_disagreement_series: Vec<f64>,
    /// Maneuver runs: largest distance from a frame estimate to the reference.
    pub tracking_error_series: Vec<f64>,
    pub dt: f64,
}

impl Metrics {
    pub fn steps(&self) -> usize {
        self.convergence_rate_series
            .len()
            .max(self.coverage_rate_series.len())
            .saturating_sub(1)
    }

    pub fn final_rate(&self) -> f64 {
        self.convergence_rate_series
            .last()
            .or(self.coverage_rate_series.last())
            .copied()
            .unwrap_or(0.0)
    }
}

/// Fraction of goals with some robot within `eps_conv`.
pub fn convergence_rate(snapshot: &[RobotState], goals: &GoalSet, eps_conv: f64) -> f64 {
    let hit = goals
        .goals()
        .iter()
        .filter(|q| snapshot.iter().any(|r| (r.p - *q).norm() <= eps_conv))
        .count();
    hit as f64 / goals.len() as f64
}

/// Fraction of black cells with some robot within one cell length (inclusive).
pub fn coverage_rate(positions: &[Vec2], grid: &ShapeGrid, at: &Placement) -> f64 {
    let w = grid.width();
    let mut covered = vec![false; w * grid.height()];
    let l = grid.cell_len();
    for &p in positions {
        let c0 = grid.nearest_cell_in(p, at);
        for dy in -2..=2 {
            for dx in -2..=2 {
                let c = Cell::new(c0.x + dx, c0.y + dy);
                if grid.is_black(c) && (grid.position_in(c, at) - p).norm() <= l {
                    covered[c.y as usize * w + c.x as usize] = true;
                }
            }
        }
    }
    let n = grid.n_black();
    let hit = grid
        .black_cells()
        .filter(|c| covered[c.y as usize * w + c.x as usize])
        .count();
    hit as f64 / n as f64
}

/// True iff the last `window` entries all have a rate below 1 and every robot
/// slower than `v_eps`. `max_speeds[k]` is the fastest robot's speed at step k.
pub fn detect_deadlock(rates: &[f64], max_speeds: &[f64], v_eps: f64, window: usize) -> bool {
    let n = rates.len().min(max_speeds.len());
    if window == 0 || n < window {
        return false;
    }
    (n - window..n).all(|k| rates[k] < 1.0 && max_speeds[k] < v_eps)
}

/// Mean over robots of path length up to and including `until` (all steps if `None`).
pub fn avg_distance(trace: &[TraceRecord], until: Option<usize>) -> f64 {
    let mut per: BTreeMap<usize, (Vec2, f64)> = BTreeMap::new();
    for r in trace.iter().filter(|r| until.is_none_or(|u| r.step <= u)) {
        per.entry(r.id)
            .and_modify(|(last, d)| {
                *d += (r.p - *last).norm();
                *last = r.p;
            })
            .or_insert((r.p, 0.0));
    }
    if per.is_empty() {
        return 0.0;
    }
    per.values().map(|(_, d)| d).sum::<f64>() / per.len() as f64
}

pub fn min_pairwise_distance(positions: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

fn max_pairwise_distance(points: &[Vec2]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

/// Incremental metric bookkeeping for a run.
pub(crate) struct Tracker {
    kind: ScenarioKind,
    goals: Option<GoalSet>,
    grid: Option<ShapeGrid>,
    trajectory: Option<ReferenceTrajectory>,
    eps_conv: f64,
    target: f64,
    n_initial: usize,
    metrics: Metrics,
    last: BTreeMap<usize, Vec2>,
    traveled: f64,
    traveled_series: Vec<f64>,
    hold: usize,
    converged_at: Option<usize>,
    still: usize,
}

impl Tracker {
    pub(crate) fn new(config: &ScenarioConfig, grid: Option<ShapeGrid>) -> Self {
        let goals = match &config.shape {
            Shape::Goals(g) => Some(g.clone()),
            Shape::Grid(_) => None,
        };
        let target = match config.kind {
            ScenarioKind::Precise => 1.0,
            ScenarioKind::Coverage => config.coverage_target,
            ScenarioKind::Maneuver => f64::INFINITY,
        };
        Tracker {
            kind: config.kind,
            goals,
            grid,
            trajectory: config.trajectory.clone(),
            eps_conv: config.params.r_avoid / 4.0,
            target,
            n_initial: config.n_robot,
            metrics: Metrics {
                min_pairwise_distance: f64::INFINITY,
                dt: config.params.dt,
                ..Metrics::default()
            },
            last: BTreeMap::new(),
            traveled: 0.0,
            traveled_series: Vec::new(),
            hold: 0,
            converged_at: None,
            still: 0,
        }
    }

    pub(crate) fn record(&mut self, step: usize, t: f64, state: &[RobotState]) {
        for r in state {
            if let Some(prev) = self.last.insert(r.id, r.p) {
                self.traveled += (r.p - prev).norm();
            }
        }
        self.traveled_series.push(self.traveled / self.n_initial as f64);

        let positions: Vec<Vec2> = state.iter().map(|r| r.p).collect();
        let rate = match self.kind {
            ScenarioKind::Precise => {
                let r = convergence_rate(state, self.goals.as_ref().expect("goals"), self.eps_conv);
                self.metrics.convergence_rate_series.push(r);
                r
            }
            ScenarioKind::Coverage => {
                let grid = self.grid.as_ref().expect("grid");
                let r = coverage_rate(&positions, grid, &grid.static_placement());
                self.metrics.coverage_rate_series.push(r);
                r
            }
            ScenarioKind::Maneuver => {
                let grid = self.grid.as_ref().expect("grid");
                let tr = self.trajectory.as_ref().expect("trajectory");
                let r = coverage_rate(&positions, grid, &reference_placement(tr, t));
                self.metrics.coverage_rate_series.push(r);
                let q_ref = tr.at(t).q;
                let frames: Vec<Vec2> = state.iter().map(|r| r.frame.q_o).collect();
                self.metrics.frame_disagreement_series.push(max_pairwise_distance(&frames));
                let track = frames.iter().map(|q| (q - q_ref).norm()).fold(0.0, f64::max);
                self.metrics.tracking_error_series.push(track);
                r
            }
        };

        if rate >= self.target {
            self.hold += 1;
            if self.hold >= CONVERGENCE_HOLD && self.converged_at.is_none() {
                self.converged_at = Some(step + 1 - self.hold);
            }
        } else {
            self.hold = 0;
        }

        let fastest = state.iter().map(|r| r.v.norm()).fold(0.0, f64::max);
        if rate < self.target && self.kind != ScenarioKind::Maneuver && fastest < DEADLOCK_SPEED {
            self.still += 1;
            if self.still >= DEADLOCK_WINDOW {
                self.metrics.deadlock = true;
            }
        } else {
            self.still = 0;
        }

        if t >= SAFETY_WARMUP - 1e-9 {
            let d = min_pairwise_distance(&positions);
            self.metrics.min_pairwise_distance = self.metrics.min_pairwise_distance.min(d);
        }
    }

    pub(crate) fn converged(&self) -> bool {
        self.converged_at.is_some()
    }

    pub(crate) fn finish(mut self) -> Metrics {
        self.metrics.convergence_time = self.converged_at.map(|s| s as f64 * self.metrics.dt);
        let until = self.converged_at.unwrap_or(self.traveled_series.len() - 1);
        self.metrics.avg_distance = self.traveled_series[until];
        self.metrics
    }
}
