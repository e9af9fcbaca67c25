//! Centralized comparison run: robots are assigned goals up front and drive
//! straight at full speed, keeping the usual repulsion.

use super::hungarian::{hungarian_baseline, Assignment};
use crate::error::Result;
use crate::geom::Vec2;
use crate::precise::GoalSet;
use crate::swarm::{all_views, clamp_speed, repulsion_command, RobotState, SwarmParams};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub assignment: Assignment,
    pub avg_distance: f64,
    /// Step at which every robot was within `eps_conv` of its goal.
    pub arrival_step: Option<usize>,
}

pub fn run_baseline(starts: &[Vec2], goals: &GoalSet, params: &SwarmParams, max_steps: usize) -> Result<BaselineRun> {
    let assignment = hungarian_baseline(starts, goals)?;
    let targets: Vec<Vec2> = assignment.goal_of.iter().map(|&j| goals.goals()[j]).collect();
    let eps_conv = params.r_avoid / 4.0;
    let mut state: Vec<RobotState> = starts.iter().enumerate().map(|(i, &p)| RobotState::at(i, p)).collect();
    let mut traveled = 0.0;
    let mut arrival_step = None;
    for step in 0..=max_steps {
        if state.iter().zip(&targets).all(|(r, g)| (r.p - g).norm() <= eps_conv) {
            arrival_step = Some(step);
            break;
        }
        if step == max_steps {
            break;
        }
        let views = all_views(&state, params.r_sense);
        let next: Vec<RobotState> = state
            .iter()
            .zip(&views)
            .zip(&targets)
            .map(|((r, view), g)| {
                let d = g - r.p;
                let n = d.norm();
                let drive = if n > 0.0 { d * (params.v_max.min(n / params.dt) / n) } else { Vec2::zeros() };
                let v = clamp_speed(drive + repulsion_command(r.p, view, params), params.v_max);
                RobotState { p: r.p + v * params.dt, v, ..r.clone() }
            })
            .collect();
        traveled += next.iter().zip(&state).map(|(a, b)| (a.p - b.p).norm()).sum::<f64>();
        state = next;
    }
    Ok(BaselineRun {
        avg_distance: traveled / starts.len() as f64,
        assignment,
        arrival_step,
    })
}
