//! Shared swarm model: robot state, sensing neighborhoods, speed limits,
//! single-integrator stepping and the neighbor-interaction commands used by
//! both formation controllers.
//!
//! All reductions over neighbors run in ascending id order so that a round's
//! commands are bit-identical regardless of the order robots are evaluated in.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Result, SwarmError};
use crate::geom::Vec2;
use crate::maneuver::ShapeFrame;

/// Hop count over the extended naturals `{0, 1, 2, ...} ∪ {inf}`.
///
/// The derived ordering places every finite count below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Hop {
    Finite(u32),
    #[default]
    Infinite,
}

impl Hop {
    pub fn succ(self) -> Hop {
        match self {
            Hop::Finite(h) => Hop::Finite(h.saturating_add(1)),
            Hop::Infinite => Hop::Infinite,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Hop::Finite(h) => Some(h),
            Hop::Infinite => None,
        }
    }
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hop::Finite(h) => write!(f, "{h}"),
            Hop::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Hop {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "inf" {
            Ok(Hop::Infinite)
        } else {
            s.parse().map(Hop::Finite)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: usize,
    pub p: Vec2,
    pub v: Vec2,
    pub h: Hop,
    pub frame: ShapeFrame,
    pub informed: bool,
}

impl RobotState {
    pub fn at(id: usize, p: Vec2) -> Self {
        RobotState {
            id,
            p,
            v: Vec2::zeros(),
            h: Hop::Infinite,
            frame: ShapeFrame::at(p),
            informed: false,
        }
    }
}

/// Controller gains and geometry shared by all formation modes.
///
/// `c1`/`c2` weight the goal density; `c1n`..`c4n` are the negotiation gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwarmParams {
    pub r_sense: f64,
    pub r_avoid: f64,
    pub v_max: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub c1n: f64,
    pub c2n: f64,
    pub c3n: f64,
    pub c4n: f64,
    pub dt: f64,
    pub alignment: AlignmentUpdate,
}

/// How the velocity-alignment term treats the robot's own velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignmentUpdate {
    /// Own velocity solved for within the round.
    #[default]
    Implicit,
    /// Own velocity taken from the previous round.
    Explicit,
}

impl AlignmentUpdate {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "implicit" => Some(AlignmentUpdate::Implicit),
            "explicit" => Some(AlignmentUpdate::Explicit),
            _ => None,
        }
    }
}

impl Default for SwarmParams {
    fn default() -> Self {
        SwarmParams {
            r_sense: 1.3,
            r_avoid: 0.3,
            v_max: 2.0,
            kappa1: 3.0,
            kappa2: 10.0,
            kappa3: 1.0,
            c1: 1.0,
            c2: 0.4,
            sigma: 0.22,
            sigma1: 2.0,
            sigma2: 10.0,
            alpha: 0.8,
            c1n: 1.6,
            c2n: 1.6,
            c3n: 1.6,
            c4n: 1.6,
            dt: 0.05,
            alignment: AlignmentUpdate::Implicit,
        }
    }
}

impl SwarmParams {
    pub const FIELD_NAMES: [&'static str; 17] = [
        "r_sense", "r_avoid", "v_max", "kappa1", "kappa2", "kappa3", "c1", "c2", "sigma",
        "sigma1", "sigma2", "alpha", "c1n", "c2n", "c3n", "c4n", "dt",
    ];

    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "r_sense" => &mut self.r_sense,
            "r_avoid" => &mut self.r_avoid,
            "v_max" => &mut self.v_max,
            "kappa1" => &mut self.kappa1,
            "kappa2" | "v_con" => &mut self.kappa2,
            "kappa3" => &mut self.kappa3,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "sigma" => &mut self.sigma,
            "sigma1" => &mut self.sigma1,
            "sigma2" => &mut self.sigma2,
            "alpha" => &mut self.alpha,
            "c1n" => &mut self.c1n,
            "c2n" => &mut self.c2n,
            "c3n" => &mut self.c3n,
            "c4n" => &mut self.c4n,
            "dt" => &mut self.dt,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let mut copy = *self;
        for name in Self::FIELD_NAMES {
            let v = *copy.field_mut(name).expect("known field");
            if !(v.is_finite() && v > 0.0) {
                return Err(SwarmError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.alpha >= 1.0 {
            return Err(SwarmError::Config("alpha must lie in (0, 1)".into()));
        }
        if self.r_avoid >= self.r_sense {
            return Err(SwarmError::Config("r_avoid must be below r_sense".into()));
        }
        Ok(())
    }
}

/// What robot `i` receives from one neighbor in a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub id: usize,
    pub p: Vec2,
    pub v: Vec2,
    pub h: Hop,
    pub frame: ShapeFrame,
}

impl Neighbor {
    fn of(r: &RobotState) -> Self {
        Neighbor {
            id: r.id,
            p: r.p,
            v: r.v,
            h: r.h,
            frame: r.frame,
        }
    }
}

/// Neighbors of one robot, ascending by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborView {
    pub entries: Vec<Neighbor>,
}

impl NeighborView {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Neighbor> {
        self.entries.iter()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.entries.iter().map(|n| n.id).collect()
    }
}

pub fn find_robot(snapshot: &[RobotState], id: usize) -> Result<&RobotState> {
    snapshot
        .iter()
        .find(|r| r.id == id)
        .ok_or(SwarmError::NoSuchRobot(id))
}

/// Robots strictly closer than `r_sense` to robot `id`, sorted by id.
pub fn neighbors(snapshot: &[RobotState], id: usize, r_sense: f64) -> Result<NeighborView> {
    let me = find_robot(snapshot, id)?;
    Ok(view_of(snapshot, me, r_sense))
}

fn view_of(snapshot: &[RobotState], me: &RobotState, r_sense: f64) -> NeighborView {
    let r2 = r_sense * r_sense;
    let mut entries: Vec<Neighbor> = snapshot
        .iter()
        .filter(|r| r.id != me.id && (r.p - me.p).norm_squared() < r2)
        .map(Neighbor::of)
        .collect();
    entries.sort_by_key(|n| n.id);
    NeighborView { entries }
}

/// Views for every robot of the snapshot, in snapshot order.
pub fn all_views(snapshot: &[RobotState], r_sense: f64) -> Vec<NeighborView> {
    snapshot.iter().map(|r| view_of(snapshot, r, r_sense)).collect()
}

pub fn clamp_speed(v: Vec2, v_max: f64) -> Vec2 {
    let n = v.norm();
    if n <= v_max {
        v
    } else if n.is_finite() {
        v * (v_max / n)
    } else {
        // finite components whose norm overflows; non-finite ones stay NaN
        let u = v / v.amax();
        u * (v_max / u.norm())
    }
}

/// One Euler step of the single integrator. Every robot must have a command.
pub fn integrate_step(
    snapshot: &[RobotState],
    commands: &BTreeMap<usize, Vec2>,
    dt: f64,
) -> Result<Vec<RobotState>> {
    snapshot
        .iter()
        .map(|r| {
            let v = *commands.get(&r.id).ok_or(SwarmError::MissingCommand(r.id))?;
            Ok(RobotState {
                p: r.p + v * dt,
                v,
                ..r.clone()
            })
        })
        .collect()
}

/// Repulsion weight. Zero outside the avoidance range, growing as robots close in.
pub fn mu(d: f64, r_avoid: f64) -> f64 {
    if d >= r_avoid {
        return 0.0;
    }
    let d = d.max(1e-4 * r_avoid);
    r_avoid / d - 1.0
}

pub fn repulsion_command(p_i: Vec2, view: &NeighborView, params: &SwarmParams) -> Vec2 {
    let mut acc = Vec2::zeros();
    for n in view.iter() {
        let diff = p_i - n.p;
        acc += mu(diff.norm(), params.r_avoid) * diff;
    }
    params.kappa3 * acc
}

pub fn alignment_command(view: &NeighborView, own_v: Vec2) -> Vec2 {
    if view.is_empty() {
        return Vec2::zeros();
    }
    let inv = 1.0 / view.len() as f64;
    let mut acc = Vec2::zeros();
    for n in view.iter() {
        acc -= inv * (own_v - n.v);
    }
    acc
}

/// Solves `v = base + alignment_command(view, v)` for the robot's own `v`,
/// holding the neighbors' velocities fixed.
///
/// Feeding last round's `v` into the alignment term instead makes velocity
/// differences flip sign and double every round under fixed-step updates.
pub fn with_implicit_alignment(base: Vec2, view: &NeighborView) -> Vec2 {
    if view.is_empty() {
        return base;
    }
    let inv = 1.0 / view.len() as f64;
    let mut mean = Vec2::zeros();
    for n in view.iter() {
        mean += inv * n.v;
    }
    0.5 * (base + mean)
}
