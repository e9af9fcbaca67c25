//! Area coverage formation over a binary grid.
//!
//! Black cells (`xi = 0`) describe the shape. Inside the shape a robot is
//! pulled toward the unoccupied black cells it can sense; near the boundary it
//! is pulled toward all sensed black cells; far away it follows a grayscale
//! guidance field that darkens toward the shape.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Result, SwarmError};
use crate::geom::{rotate, vec2, Vec2};
use crate::swarm::{
    alignment_command, all_views, clamp_speed, repulsion_command, with_implicit_alignment, AlignmentUpdate, NeighborView,
    RobotState, SwarmParams,
};

/// Cell index: `x` is the column, `y` the row counted upward from the bottom
/// row of the source image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

impl Cell {
    pub const fn new(x: i64, y: i64) -> Self {
        Cell { x, y }
    }

    fn offset(self, other: Cell) -> Vec2 {
        vec2((self.x - other.x) as f64, (self.y - other.y) as f64)
    }
}

/// Where the grid sits in the world: the world position of the origin cell
/// and the grid's rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub origin: Vec2,
    pub angle: f64,
}

pub fn cell_size(n_robot: usize, n_cell: usize, r_avoid: f64) -> Result<f64> {
    if n_cell == 0 {
        return Err(SwarmError::EmptyShape);
    }
    Ok((std::f64::consts::FRAC_PI_4 * n_robot as f64 / n_cell as f64).sqrt() * r_avoid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeGrid {
    width: usize,
    height: usize,
    /// Row-major, `y * width + x`.
    black: Vec<bool>,
    origin_cell: Cell,
    anchor: Vec2,
    cell_len: f64,
}

impl ShapeGrid {
    /// `black` is row-major with row 0 at the bottom. The grid starts with unit
    /// cells anchored at the world origin; see [`ShapeGrid::calibrate`].
    pub fn new(width: usize, height: usize, black: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || black.len() != width * height {
            return Err(SwarmError::Config(format!(
                "grid of {width}x{height} needs {} cells, got {}",
                width * height,
                black.len()
            )));
        }
        let cells: Vec<Cell> = (0..height as i64)
            .rev()
            .flat_map(|y| (0..width as i64).map(move |x| Cell::new(x, y)))
            .filter(|c| black[c.y as usize * width + c.x as usize])
            .collect();
        if cells.is_empty() {
            return Err(SwarmError::NoBlackCells);
        }
        let n = cells.len() as f64;
        let centroid = cells
            .iter()
            .fold(Vec2::zeros(), |acc, c| acc + vec2(c.x as f64, c.y as f64))
            / n;
        let mut origin_cell = cells[0];
        let mut best = f64::INFINITY;
        for c in &cells {
            let d = (vec2(c.x as f64, c.y as f64) - centroid).norm_squared();
            if d < best {
                best = d;
                origin_cell = *c;
            }
        }
        Ok(ShapeGrid {
            width,
            height,
            black,
            origin_cell,
            anchor: Vec2::zeros(),
            cell_len: 1.0,
        })
    }

    /// Sets the cell size so that the black area equals the robots' footprint.
    pub fn calibrate(&mut self, n_robot: usize, r_avoid: f64) -> Result<()> {
        self.cell_len = cell_size(n_robot, self.n_black(), r_avoid)?;
        Ok(())
    }

    pub fn with_anchor(mut self, anchor: Vec2) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn with_cell_len(mut self, cell_len: f64) -> Self {
        self.cell_len = cell_len;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_len(&self) -> f64 {
        self.cell_len
    }

    pub fn anchor(&self) -> Vec2 {
        self.anchor
    }

    pub fn origin_cell(&self) -> Cell {
        self.origin_cell
    }

    pub fn static_placement(&self) -> Placement {
        Placement {
            origin: self.anchor,
            angle: 0.0,
        }
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn check_cell(&self, c: Cell) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(SwarmError::CellOutOfGrid {
                x: c.x,
                y: c.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    pub fn is_black(&self, c: Cell) -> bool {
        self.contains(c) && self.black[self.index(c)]
    }

    pub fn n_black(&self) -> usize {
        self.black.iter().filter(|b| **b).count()
    }

    /// All cells in row-major order as drawn: top row first, left to right.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height as i64).rev().flat_map(move |y| (0..self.width as i64).map(move |x| Cell::new(x, y)))
    }

    pub fn black_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(move |c| self.black[self.index(*c)])
    }

    /// Static world position of a cell: `(cell - origin_cell) * len + anchor`.
    pub fn cell_position(&self, c: Cell) -> Result<Vec2> {
        self.check_cell(c)?;
        Ok(self.position_in(c, &self.static_placement()))
    }

    /// World position of a cell under an arbitrary placement. No bounds check.
    pub fn position_in(&self, c: Cell, at: &Placement) -> Vec2 {
        rotate(c.offset(self.origin_cell) * self.cell_len, at.angle) + at.origin
    }

    /// Fractional cell coordinates of a world point.
    fn grid_coords(&self, p: Vec2, at: &Placement) -> Vec2 {
        let local = rotate(p - at.origin, -at.angle) / self.cell_len;
        local + vec2(self.origin_cell.x as f64, self.origin_cell.y as f64)
    }

    pub fn nearest_cell(&self, p: Vec2) -> Cell {
        self.nearest_cell_in(p, &self.static_placement())
    }

    /// Rounds to the nearest cell (half-way ties go to the lower index) and
    /// clamps into the grid.
    pub fn nearest_cell_in(&self, p: Vec2, at: &Placement) -> Cell {
        let u = self.grid_coords(p, at);
        let round = |v: f64, hi: usize| ((v - 0.5).ceil() as i64).clamp(0, hi as i64 - 1);
        Cell::new(round(u.x, self.width), round(u.y, self.height))
    }

    /// Renders the grid back to ASCII art, top row first.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity((self.width + 1) * self.height);
        for y in (0..self.height as i64).rev() {
            for x in 0..self.width as i64 {
                s.push(if self.is_black(Cell::new(x, y)) { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

/// Grayscale guidance field: 0 on the shape, brightening ring by ring.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayGrid {
    width: usize,
    /// Chebyshev distance to the nearest black cell, in cells.
    dist: Vec<u32>,
    n_gray: u32,
}

impl GrayGrid {
    pub fn n_gray(&self) -> u32 {
        self.n_gray
    }

    pub fn distance(&self, c: Cell) -> u32 {
        self.dist[c.y as usize * self.width + c.x as usize]
    }

    pub fn value(&self, c: Cell) -> f64 {
        (self.distance(c) as f64 / (self.n_gray as f64 + 1.0)).min(1.0)
    }
}

/// Default ring count: wide enough that the gray band spans the whole grid.
pub fn default_n_gray(grid: &ShapeGrid) -> u32 {
    grid.width().max(grid.height()) as u32
}

pub fn grayscale_convert(grid: &ShapeGrid, n_gray: u32) -> GrayGrid {
    let (w, h) = (grid.width, grid.height);
    let mut dist = vec![u32::MAX; w * h];
    let mut queue = VecDeque::new();
    for c in grid.black_cells() {
        dist[grid.index(c)] = 0;
        queue.push_back(c);
    }
    // multi-source BFS over the 8-neighborhood yields the Chebyshev distance
    while let Some(c) = queue.pop_front() {
        let d = dist[grid.index(c)];
        for dy in -1..=1 {
            for dx in -1..=1 {
                let n = Cell::new(c.x + dx, c.y + dy);
                if grid.contains(n) && dist[grid.index(n)] == u32::MAX {
                    dist[grid.index(n)] = d + 1;
                    queue.push_back(n);
                }
            }
        }
    }
    GrayGrid {
        width: w,
        dist,
        n_gray: n_gray.max(1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMode {
    UnoccupiedBlack,
    AllBlack,
}

/// Black cells strictly within `r_sense` of `p_i`, in [`ShapeGrid::cells`] order. In
/// [`CellMode::UnoccupiedBlack`] a cell is dropped when a neighbor sits within
/// half a cell of its center; the robot itself never occupies a cell.
pub fn local_cells(
    p_i: Vec2,
    grid: &ShapeGrid,
    at: &Placement,
    view: &NeighborView,
    mode: CellMode,
    r_sense: f64,
) -> Vec<Cell> {
    let occupied = match mode {
        CellMode::AllBlack => Vec::new(),
        CellMode::UnoccupiedBlack => occupied_cells(grid, at, view),
    };
    let u = grid.grid_coords(p_i, at);
    let reach = r_sense / grid.cell_len;
    let x0 = ((u.x - reach).floor() as i64).max(0);
    let x1 = ((u.x + reach).ceil() as i64).min(grid.width as i64 - 1);
    let y0 = ((u.y - reach).floor() as i64).max(0);
    let y1 = ((u.y + reach).ceil() as i64).min(grid.height as i64 - 1);
    let r2 = r_sense * r_sense;
    let mut out = Vec::new();
    for y in (y0..=y1).rev() {
        for x in x0..=x1 {
            let c = Cell::new(x, y);
            if !grid.black[grid.index(c)] {
                continue;
            }
            if (grid.position_in(c, at) - p_i).norm_squared() >= r2 {
                continue;
            }
            if occupied.contains(&c) {
                continue;
            }
            out.push(c);
        }
    }
    out
}

fn occupied_cells(grid: &ShapeGrid, at: &Placement, view: &NeighborView) -> Vec<Cell> {
    let half = grid.cell_len / 2.0;
    let mut out = Vec::new();
    for n in view.iter() {
        let c0 = grid.nearest_cell_in(n.p, at);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let c = Cell::new(c0.x + dx, c0.y + dy);
                if grid.contains(c) && (grid.position_in(c, at) - n.p).norm() <= half && !out.contains(&c) {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Fraction of the sensing radius over which sensed cells pull a robot.
pub const CELL_WEIGHT_REACH: f64 = 0.5;

/// Distance weight for sensed cells, `z = ‖q - p‖ / (CELL_WEIGHT_REACH * r_sense)`.
pub fn cell_weight(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    let a = 1.0 - z * z;
    a * a
}

pub fn explore_command_coverage(
    p_i: Vec2,
    cells: &[Cell],
    grid: &ShapeGrid,
    at: &Placement,
    kappa1: f64,
    r_sense: f64,
) -> Vec2 {
    let mut num = Vec2::zeros();
    let mut den = 0.0;
    for &c in cells {
        let d = grid.position_in(c, at) - p_i;
        let w = cell_weight(d.norm() / (CELL_WEIGHT_REACH * r_sense));
        num += w * d;
        den += w;
    }
    if den > 0.0 {
        kappa1 * num / den
    } else {
        Vec2::zeros()
    }
}

/// Goal cell for the access command starting from `from`.
pub fn access_goal(from: Cell, grid: &ShapeGrid, gray: &GrayGrid) -> Cell {
    let xi = gray.value(from);
    if xi == 0.0 {
        return from;
    }
    if xi < 1.0 {
        let mut best = from;
        let mut best_v = xi;
        for dy in [1, 0, -1] {
            for dx in -1..=1 {
                let c = Cell::new(from.x + dx, from.y + dy);
                if !grid.contains(c) {
                    continue;
                }
                let v = gray.value(c);
                // strict comparison in row-major scan keeps the first darkest
                if v < best_v {
                    best = c;
                    best_v = v;
                }
            }
        }
        return best;
    }
    let mut best = from;
    let mut best_d = i64::MAX;
    for c in grid.cells() {
        if gray.value(c) < 1.0 {
            let d = (c.x - from.x).pow(2) + (c.y - from.y).pow(2);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
    }
    best
}

pub fn access_command(p_i: Vec2, grid: &ShapeGrid, gray: &GrayGrid, at: &Placement, kappa2: f64) -> Vec2 {
    let here = grid.nearest_cell_in(p_i, at);
    let xi = gray.value(here);
    if xi == 0.0 {
        return Vec2::zeros();
    }
    let goal = grid.position_in(access_goal(here, grid, gray), at);
    let d = goal - p_i;
    let n = d.norm();
    if n == 0.0 {
        return Vec2::zeros();
    }
    kappa2 * xi * d / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageBranch {
    /// Nearest cell black: explore unoccupied black cells with `sigma1`.
    ExploreInside,
    /// Nearest cell not black, black cells in range: explore all of them with `sigma2`.
    ExploreBoundary,
    /// No black cell in range: only the access command drives the robot.
    AccessOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageCommand {
    pub v: Vec2,
    pub branch: CoverageBranch,
}

/// One robot's round: `clamp(explore + access + repulsion + alignment)`.
///
/// Reads only `p_j` and `v_j` from the view.
pub fn coverage_command(
    p_i: Vec2,
    v_i: Vec2,
    view: &NeighborView,
    grid: &ShapeGrid,
    gray: &GrayGrid,
    at: &Placement,
    params: &SwarmParams,
) -> CoverageCommand {
    coverage_command_with_drift(p_i, v_i, view, grid, gray, at, Vec2::zeros(), params)
}

/// `coverage_command` for a shape whose cells move with velocity `drift` at
/// the robot's position. The drift joins the other terms before alignment, so
/// a swarm moving with the shape is an alignment fixed point.
#[allow(clippy::too_many_arguments)]
pub fn coverage_command_with_drift(
    p_i: Vec2,
    v_i: Vec2,
    view: &NeighborView,
    grid: &ShapeGrid,
    gray: &GrayGrid,
    at: &Placement,
    drift: Vec2,
    params: &SwarmParams,
) -> CoverageCommand {
    let here = grid.nearest_cell_in(p_i, at);
    let inside = grid.is_black(here);
    let (mode, kappa1) = if inside {
        (CellMode::UnoccupiedBlack, params.sigma1)
    } else {
        (CellMode::AllBlack, params.sigma2)
    };
    let cells = local_cells(p_i, grid, at, view, mode, params.r_sense);
    let branch = match (inside, cells.is_empty()) {
        (true, _) => CoverageBranch::ExploreInside,
        (false, false) => CoverageBranch::ExploreBoundary,
        (false, true) => CoverageBranch::AccessOnly,
    };
    let explore = explore_command_coverage(p_i, &cells, grid, at, kappa1, params.r_sense);
    let access = access_command(p_i, grid, gray, at, params.kappa2);
    let base = explore + access + repulsion_command(p_i, view, params) + drift;
    let v = match params.alignment {
        AlignmentUpdate::Implicit => with_implicit_alignment(base, view),
        AlignmentUpdate::Explicit => base + alignment_command(view, v_i),
    };
    CoverageCommand {
        v: clamp_speed(v, params.v_max),
        branch,
    }
}

/// Commands for every robot from one snapshot, static placement.
pub fn step_coverage(
    snapshot: &[RobotState],
    grid: &ShapeGrid,
    gray: &GrayGrid,
    params: &SwarmParams,
) -> BTreeMap<usize, Vec2> {
    let at = grid.static_placement();
    let views = all_views(snapshot, params.r_sense);
    snapshot
        .iter()
        .zip(&views)
        .map(|(r, view)| (r.id, coverage_command(r.p, r.v, view, grid, gray, &at, params).v))
        .collect()
}
