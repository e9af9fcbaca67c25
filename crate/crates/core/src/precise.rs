//! Assignment-free precise shape formation.
//!
//! Each robot weighs the goals it can sense by how crowded they are and moves
//! toward the weighted mean of those goals. Robots whose sensed goals are all
//! taken become anchors and flood a hop count of zero; the resulting hop-count
//! gradient biases everyone else toward goals away from the anchors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Result, SwarmError};
use crate::geom::Vec2;
use crate::swarm::{all_views, clamp_speed, repulsion_command, Hop, NeighborView, RobotState, SwarmParams};

/// Distance under which `p_i` counts as sitting exactly on a goal.
pub const AT_GOAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GoalSet {
    goals: Vec<Vec2>,
}

impl GoalSet {
    pub fn new(goals: Vec<Vec2>) -> Result<Self> {
        if goals.is_empty() {
            return Err(SwarmError::EmptyShape);
        }
        for (i, a) in goals.iter().enumerate() {
            if goals[..i].iter().any(|b| (a - b).norm() == 0.0) {
                return Err(SwarmError::DuplicateGoal { line: i + 1 });
            }
        }
        Ok(GoalSet { goals })
    }

    pub fn goals(&self) -> &[Vec2] {
        &self.goals
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }
}

/// Maps a goal's crowding density to an exploration weight, decreasing from 1
/// toward 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityWeight {
    /// `e^{-rate * rho}`: never reaches zero.
    Exponential { rate: f64 },
    /// `(1 - min(rho, 1)^2)^2`: zero once a goal is fully crowded.
    Biweight,
}

impl DensityWeight {
    pub const DEFAULT_RATE: f64 = 12.0;

    pub fn eval(self, rho: f64) -> f64 {
        match self {
            DensityWeight::Exponential { rate } => (-rate * rho).exp(),
            DensityWeight::Biweight => {
                let z = rho.clamp(0.0, 1.0);
                let a = 1.0 - z * z;
                a * a
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            DensityWeight::Exponential { rate } => format!("exponential:{rate}"),
            DensityWeight::Biweight => "biweight".into(),
        }
    }

    /// Accepts `biweight`, `exponential` (default rate) or `exponential:<rate>`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.split_once(':') {
            None if s == "biweight" => Some(DensityWeight::Biweight),
            None if s == "exponential" => Some(DensityWeight::default()),
            Some(("exponential", r)) => match r.trim().parse::<f64>() {
                Ok(rate) if rate.is_finite() && rate > 0.0 => Some(DensityWeight::Exponential { rate }),
                _ => None,
            },
            _ => None,
        }
    }
}

impl Default for DensityWeight {
    fn default() -> Self {
        DensityWeight::Exponential { rate: Self::DEFAULT_RATE }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreciseOptions {
    /// A goal is occupied when some other robot is within this distance.
    pub eps_occ: f64,
    pub weight: DensityWeight,
}

impl PreciseOptions {
    pub fn for_params(params: &SwarmParams) -> Self {
        PreciseOptions {
            eps_occ: params.r_avoid / 4.0,
            weight: DensityWeight::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopState {
    pub h: Hop,
    pub grad: Vec2,
    pub grad_defined: bool,
}

impl HopState {
    pub fn undefined(h: Hop) -> Self {
        HopState {
            h,
            grad: Vec2::zeros(),
            grad_defined: false,
        }
    }
}

pub fn local_goals(p_i: Vec2, goals: &GoalSet, r_sense: f64) -> Vec<Vec2> {
    let r2 = r_sense * r_sense;
    goals
        .goals
        .iter()
        .copied()
        .filter(|q| (q - p_i).norm_squared() < r2)
        .collect()
}

/// Blocked: at least one sensed goal and every one of them has another robot on it.
pub fn is_blocked(local: &[Vec2], view: &NeighborView, eps_occ: f64) -> bool {
    !local.is_empty()
        && local
            .iter()
            .all(|q| view.iter().any(|n| (n.p - q).norm() <= eps_occ))
}

pub fn update_hop(blocked: bool, view: &NeighborView) -> Hop {
    if blocked {
        return Hop::Finite(0);
    }
    view.iter().map(|n| n.h).min().unwrap_or(Hop::Infinite).succ()
}

/// Direction of increasing hop count around `p_i`. Neighbors with an infinite
/// count do not contribute.
pub fn hop_gradient(p_i: Vec2, h_i: Hop, view: &NeighborView) -> HopState {
    let Some(hi) = h_i.finite() else {
        return HopState::undefined(h_i);
    };
    let mut grad = Vec2::zeros();
    let mut any = false;
    for n in view.iter() {
        let Some(hj) = n.h.finite() else { continue };
        let d = n.p - p_i;
        let d2 = d.norm_squared();
        if d2 == 0.0 {
            continue;
        }
        any = true;
        grad += (hj as f64 - hi as f64) * d / d2;
    }
    HopState {
        h: h_i,
        grad,
        grad_defined: any && grad != Vec2::zeros(),
    }
}

/// Crowding of goal `q_k` as seen by robot `i`: a gaussian count of neighbors
/// near the goal plus a penalty growing with the angle between the hop-count
/// gradient and the direction to the goal.
pub fn goal_density(q_k: Vec2, p_i: Vec2, view: &NeighborView, hop: &HopState, params: &SwarmParams) -> f64 {
    let inv = 1.0 / (2.0 * params.sigma * params.sigma);
    let crowd: f64 = view
        .iter()
        .map(|n| (-(q_k - n.p).norm_squared() * inv).exp())
        .sum();
    let mut rho = params.c1 * crowd;
    if hop.grad_defined {
        let to_goal = q_k - p_i;
        if to_goal.norm() <= AT_GOAL_TOL {
            rho += params.c2 / 2.0;
        } else {
            let cos = (hop.grad.dot(&to_goal) / (hop.grad.norm() * to_goal.norm())).clamp(-1.0, 1.0);
            rho += params.c2 / PI * cos.acos();
        }
    }
    rho
}

/// Mean-shift pull toward the weighted mean of the sensed goals.
///
/// Returns zero when every weight vanishes (every sensed goal fully crowded).
pub fn explore_command_precise(
    p_i: Vec2,
    local: &[Vec2],
    densities: &[f64],
    weight: DensityWeight,
    kappa1: f64,
) -> Vec2 {
    debug_assert_eq!(local.len(), densities.len());
    let mut num = Vec2::zeros();
    let mut den = 0.0;
    for (q, &rho) in local.iter().zip(densities) {
        let w = weight.eval(rho);
        num += w * (q - p_i);
        den += w;
    }
    if den > 0.0 {
        kappa1 * num / den
    } else {
        Vec2::zeros()
    }
}

/// Nearest goal (lowest index on ties).
pub fn nearest_goal(p_i: Vec2, goals: &GoalSet) -> Vec2 {
    let mut best = goals.goals[0];
    let mut best_d = (best - p_i).norm_squared();
    for &q in &goals.goals[1..] {
        let d = (q - p_i).norm_squared();
        if d < best_d {
            best = q;
            best_d = d;
        }
    }
    best
}

/// Constant-speed pull to the nearest goal; active only when no goal is sensed.
pub fn guide_command(p_i: Vec2, goals: &GoalSet, local: &[Vec2], params: &SwarmParams) -> Vec2 {
    if !local.is_empty() {
        return Vec2::zeros();
    }
    let d = nearest_goal(p_i, goals) - p_i;
    let n = d.norm();
    if n == 0.0 {
        return Vec2::zeros();
    }
    params.kappa2 * d / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreciseCommand {
    pub v: Vec2,
    pub hop: HopState,
    pub blocked: bool,
}

/// One robot's round: hop update, densities, then
/// `clamp(explore + guide + repulsion)`.
///
/// Reads only `p_j` and `h_j` from the view.
pub fn precise_command(
    p_i: Vec2,
    view: &NeighborView,
    goals: &GoalSet,
    params: &SwarmParams,
    opts: &PreciseOptions,
) -> PreciseCommand {
    let local = local_goals(p_i, goals, params.r_sense);
    let blocked = is_blocked(&local, view, opts.eps_occ);
    let h = update_hop(blocked, view);
    let hop = if blocked {
        HopState::undefined(h)
    } else {
        hop_gradient(p_i, h, view)
    };
    let explore = if local.is_empty() {
        Vec2::zeros()
    } else {
        let densities: Vec<f64> = local
            .iter()
            .map(|&q| goal_density(q, p_i, view, &hop, params))
            .collect();
        explore_command_precise(p_i, &local, &densities, opts.weight, params.kappa1)
    };
    let guide = guide_command(p_i, goals, &local, params);
    let repel = repulsion_command(p_i, view, params);
    PreciseCommand {
        v: clamp_speed(explore + guide + repel, params.v_max),
        hop,
        blocked,
    }
}

#[derive(Debug, Clone, Default)]
pub struct PreciseStep {
    pub commands: BTreeMap<usize, Vec2>,
    pub hops: BTreeMap<usize, HopState>,
}

/// Commands for every robot from one snapshot.
pub fn step_precise(
    snapshot: &[RobotState],
    goals: &GoalSet,
    params: &SwarmParams,
    opts: &PreciseOptions,
) -> PreciseStep {
    let views = all_views(snapshot, params.r_sense);
    let mut out = PreciseStep::default();
    for (r, view) in snapshot.iter().zip(&views) {
        let c = precise_command(r.p, view, goals, params, opts);
        out.commands.insert(r.id, c.v);
        out.hops.insert(r.id, c.hop);
    }
    out
}
