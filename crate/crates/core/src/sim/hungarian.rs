//! Minimum-cost perfect matching (Hungarian method with potentials).

use crate::error::{Result, SwarmError};
use crate::geom::Vec2;
use crate::precise::GoalSet;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `goal_of[i]` is the goal index assigned to start `i`.
    pub goal_of: Vec<usize>,
    pub total_distance: f64,
    pub makespan_distance: f64,
}

impl Assignment {
    pub fn mean_distance(&self) -> f64 {
        self.total_distance / self.goal_of.len() as f64
    }
}

/// Solves a square assignment problem; returns the column for each row.
pub fn solve(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays, column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Minimum total Euclidean distance matching of starts to goals.
pub fn hungarian_baseline(starts: &[Vec2], goals: &GoalSet) -> Result<Assignment> {
    let q = goals.goals();
    if starts.len() != q.len() {
        return Err(SwarmError::SizeMismatch(starts.len(), q.len()));
    }
    let cost: Vec<Vec<f64>> = starts
        .iter()
        .map(|s| q.iter().map(|g| (g - s).norm()).collect())
        .collect();
    let goal_of = solve(&cost);
    let dists: Vec<f64> = goal_of.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    Ok(Assignment {
        total_distance: dists.iter().sum(),
        makespan_distance: dists.iter().copied().fold(0.0, f64::max),
        goal_of,
    })
}
