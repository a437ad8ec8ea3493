//! The 2D world: occupancy grids, agent kinematics and the episode lifecycle.
//!
//! Coordinates are continuous cell units. Cell `(i, j)` covers
//! `[i, i + 1) × [j, j + 1)`; `i` grows along +x (columns) and `j` along +y
//! (rows). Headings are measured counter-clockwise from +x, so `TurnLeft`
//! increases `theta`.

mod generate;

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub use generate::generate_map;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    InvalidConfig(&'static str),
    #[error("no valid start/goal placement after {attempts} attempts")]
    GenerationFailed { attempts: u32 },
    #[error("episode is over")]
    EpisodeOver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Wall,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, kept in `[0, 2π)`.
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta: normalize_angle(theta) }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = rem_tau(a);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn rem_tau(a: f64) -> f64 {
    let r = libm::fmod(a, TAU);
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Signed difference `to - from` wrapped into `(-π, π]`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    let d = rem_tau(to - from);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Discrete control. The integer codes are the network's output ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Action {
    Forward = 0,
    TurnLeft = 1,
    TurnRight = 2,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Forward, Action::TurnLeft, Action::TurnRight];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Action> {
        Self::ALL.get(usize::from(code)).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Running,
    Success,
    Collision,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Maze,
    Cave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalPlacement {
    /// Goal cell has at least three free 4-neighbours.
    Open,
    /// Any free cell, including corners and dead ends.
    Anywhere,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub width: usize,
    pub height: usize,
    pub forward_speed: f64,
    pub turn_rate: f64,
    pub agent_radius: f64,
    pub goal_radius: f64,
    pub max_steps: u32,
    pub min_goal_distance: u32,
    pub generator: Generator,
    pub braid_probability: f64,
    pub goal_placement: GoalPlacement,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            width: 31,
            height: 31,
            forward_speed: 0.05,
            turn_rate: PI / 60.0,
            agent_radius: 0.3,
            goal_radius: 0.35,
            max_steps: 5000,
            min_goal_distance: 10,
            generator: Generator::Maze,
            braid_probability: 0.15,
            goal_placement: GoalPlacement::Open,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = WorldError::InvalidConfig;
        if self.width < 8 || self.height < 8 {
            return Err(bad("map must be at least 8x8 cells"));
        }
        if !(self.forward_speed > 0.0 && self.forward_speed <= 0.5) {
            return Err(bad("forward_speed must be in (0, 0.5]"));
        }
        if !(self.agent_radius > 0.0 && self.agent_radius < 0.5) {
            return Err(bad("agent_radius must be in (0, 0.5)"));
        }
        if !(self.goal_radius > 0.0) {
            return Err(bad("goal_radius must be positive"));
        }
        if !(self.turn_rate > 0.0 && self.turn_rate.is_finite()) {
            return Err(bad("turn_rate must be positive"));
        }
        if self.max_steps < 1 {
            return Err(bad("max_steps must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.braid_probability) {
            return Err(bad("braid_probability must be in [0, 1]"));
        }
        Ok(())
    }
}

/// An occupancy grid with a start pose and a goal: one episode's world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub width: usize,
    pub height: usize,
    /// Row-major, `cells[j * width + i]`.
    pub cells: Vec<Cell>,
    pub start: Pose,
    pub goal: Point2,
    pub seed: u64,
}

pub type CellIndex = (usize, usize);

const NEIGHBORS4: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

impl MapSpec {
    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.width + i]
    }

    /// Out-of-bounds coordinates read as wall.
    pub fn is_wall(&self, i: isize, j: isize) -> bool {
        if i < 0 || j < 0 || i as usize >= self.width || j as usize >= self.height {
            return true;
        }
        self.cell(i as usize, j as usize) == Cell::Wall
    }

    pub fn is_wall_at(&self, p: Point2) -> bool {
        self.is_wall(libm::floor(p.x) as isize, libm::floor(p.y) as isize)
    }

    pub fn cell_of(&self, p: Point2) -> Option<CellIndex> {
        let (i, j) = (libm::floor(p.x), libm::floor(p.y));
        if i < 0.0 || j < 0.0 || i as usize >= self.width || j as usize >= self.height {
            None
        } else {
            Some((i as usize, j as usize))
        }
    }

    pub fn cell_center((i, j): CellIndex) -> Point2 {
        Point2::new(i as f64 + 0.5, j as f64 + 0.5)
    }

    pub fn free_neighbors(&self, (i, j): CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        NEIGHBORS4.iter().filter_map(move |&(di, dj)| {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            (!self.is_wall(ni, nj)).then_some((ni as usize, nj as usize))
        })
    }

    pub fn free_neighbor_count(&self, c: CellIndex) -> usize {
        self.free_neighbors(c).count()
    }

    /// Free cells with exactly one free 4-neighbour.
    pub fn dead_end_count(&self) -> usize {
        self.free_cells().filter(|&c| self.free_neighbor_count(c) == 1).count()
    }

    pub fn free_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.height)
            .flat_map(move |j| (0..self.width).map(move |i| (i, j)))
            .filter(|&(i, j)| self.cell(i, j) == Cell::Free)
    }

    /// 4-connected BFS distances (in cells) from `from`; `u32::MAX` marks
    /// unreachable or wall cells.
    pub fn bfs_distances(&self, from: CellIndex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.cells.len()];
        if self.cell(from.0, from.1) == Cell::Wall {
            return dist;
        }
        let mut queue = VecDeque::new();
        dist[from.1 * self.width + from.0] = 0;
        queue.push_back(from);
        while let Some(c) = queue.pop_front() {
            let d = dist[c.1 * self.width + c.0];
            for n in self.free_neighbors(c) {
                let k = n.1 * self.width + n.0;
                if dist[k] == u32::MAX {
                    dist[k] = d + 1;
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    pub fn start_cell(&self) -> CellIndex {
        self.cell_of(self.start.position()).expect("start inside map")
    }

    pub fn goal_cell(&self) -> CellIndex {
        self.cell_of(self.goal).expect("goal inside map")
    }

    /// True when a disc of radius `r` centred at `p` overlaps any wall cell.
    /// Touching exactly is not an overlap.
    pub fn disc_hits_wall(&self, p: Point2, r: f64) -> bool {
        let i0 = libm::floor(p.x - r) as isize;
        let i1 = libm::floor(p.x + r) as isize;
        let j0 = libm::floor(p.y - r) as isize;
        let j1 = libm::floor(p.y + r) as isize;
        for j in j0..=j1 {
            for i in i0..=i1 {
                if !self.is_wall(i, j) {
                    continue;
                }
                let cx = p.x.clamp(i as f64, i as f64 + 1.0);
                let cy = p.y.clamp(j as f64, j as f64 + 1.0);
                let (dx, dy) = (p.x - cx, p.y - cy);
                if dx * dx + dy * dy < r * r {
                    return true;
                }
            }
        }
        false
    }
}

/// Live episode: the map, the agent and the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub map: Arc<MapSpec>,
    pub agent: Pose,
    pub tick: u32,
    pub status: Status,
}

pub fn spawn_episode(map: Arc<MapSpec>, _config: &WorldConfig) -> EpisodeState {
    EpisodeState { agent: map.start, map, tick: 0, status: Status::Running }
}

impl EpisodeState {
    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    pub fn goal_distance(&self) -> f64 {
        self.agent.position().distance(self.map.goal)
    }

    /// Advances one tick. A colliding move leaves the agent at its
    /// pre-move pose.
    pub fn advance(&mut self, action: Action, config: &WorldConfig) -> Result<Status, WorldError> {
        if self.status != Status::Running {
            return Err(WorldError::EpisodeOver);
        }
        let prev = self.agent;
        let next = match action {
            Action::Forward => Pose {
                x: prev.x + config.forward_speed * libm::cos(prev.theta),
                y: prev.y + config.forward_speed * libm::sin(prev.theta),
                theta: prev.theta,
            },
            Action::TurnLeft => Pose { theta: normalize_angle(prev.theta + config.turn_rate), ..prev },
            Action::TurnRight => Pose { theta: normalize_angle(prev.theta - config.turn_rate), ..prev },
        };
        self.tick += 1;
        if self.map.disc_hits_wall(next.position(), config.agent_radius) {
            self.status = Status::Collision;
            return Ok(self.status);
        }
        self.agent = next;
        self.status = if self.goal_distance() <= config.goal_radius {
            Status::Success
        } else if self.tick >= config.max_steps {
            Status::Timeout
        } else {
            Status::Running
        };
        Ok(self.status)
    }

    pub fn step(&self, action: Action, config: &WorldConfig) -> Result<EpisodeState, WorldError> {
        let mut next = self.clone();
        next.advance(action, config)?;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open_room(w: usize, h: usize) -> MapSpec {
        let mut cells = vec![Cell::Free; w * h];
        for j in 0..h {
            for i in 0..w {
                if i == 0 || j == 0 || i == w - 1 || j == h - 1 {
                    cells[j * w + i] = Cell::Wall;
                }
            }
        }
        MapSpec {
            width: w,
            height: h,
            cells,
            start: Pose::new(2.5, 2.5, 0.0),
            goal: Point2::new(w as f64 - 2.5, h as f64 - 2.5),
            seed: 0,
        }
    }

    fn episode_at(map: MapSpec, pose: Pose) -> EpisodeState {
        let cfg = WorldConfig::default();
        let mut ep = spawn_episode(Arc::new(map), &cfg);
        ep.agent = pose;
        ep
    }

    #[test]
    fn forward_moves_along_heading() {
        let cfg = WorldConfig::default();
        let ep = episode_at(open_room(12, 12), Pose::new(3.5, 5.5, 0.0));
        let next = ep.step(Action::Forward, &cfg).unwrap();
        assert_eq!(next.agent.x, 3.5 + cfg.forward_speed);
        assert_eq!(next.agent.y, 5.5);
        assert_eq!(next.agent.theta, 0.0);
        assert_eq!(next.tick, 1);
        assert_eq!(next.status, Status::Running);
    }

    #[test]
    fn turns_wrap_heading() {
        let cfg = WorldConfig::default();
        let ep = episode_at(open_room(12, 12), Pose::new(3.5, 5.5, 0.0));
        let right = ep.step(Action::TurnRight, &cfg).unwrap();
        assert!((right.agent.theta - (TAU - cfg.turn_rate)).abs() < 1e-12);
        let left = ep.step(Action::TurnLeft, &cfg).unwrap();
        assert!((left.agent.theta - cfg.turn_rate).abs() < 1e-12);
    }

    #[test]
    fn reaching_goal_radius_is_success() {
        let cfg = WorldConfig::default();
        let mut map = open_room(12, 12);
        map.goal = Point2::new(6.0, 5.5);
        let eps = 1e-3;
        // after one forward step the agent sits at goal_radius - eps
        let x = 6.0 - cfg.goal_radius + eps - cfg.forward_speed;
        let next = episode_at(map, Pose::new(x, 5.5, 0.0)).step(Action::Forward, &cfg).unwrap();
        assert_eq!(next.status, Status::Success);
    }

    #[test]
    fn collision_keeps_pre_move_pose() {
        let cfg = WorldConfig::default();
        // wall face at x = 11; disc edge 0.01 short of it
        let x = 11.0 - cfg.agent_radius - 0.01;
        let pose = Pose::new(x, 5.5, 0.0);
        let next = episode_at(open_room(12, 12), pose).step(Action::Forward, &cfg).unwrap();
        assert_eq!(next.status, Status::Collision);
        assert_eq!(next.agent, pose);
        assert_eq!(next.step(Action::TurnLeft, &cfg), Err(WorldError::EpisodeOver));
    }

    #[test]
    fn timeout_fires_at_max_steps() {
        let cfg = WorldConfig { max_steps: 3, ..WorldConfig::default() };
        let mut ep = episode_at(open_room(12, 12), Pose::new(5.5, 5.5, 0.0));
        for _ in 0..2 {
            assert_eq!(ep.advance(Action::TurnLeft, &cfg), Ok(Status::Running));
        }
        assert_eq!(ep.advance(Action::TurnLeft, &cfg), Ok(Status::Timeout));
        assert_eq!(ep.tick, 3);
    }

    #[test]
    fn disc_overlap_checks_corners() {
        let mut map = open_room(12, 12);
        map.cells[5 * 12 + 5] = Cell::Wall;
        // pillar corner at (6, 6)
        let r = 0.3;
        let d = r / core::f64::consts::SQRT_2;
        assert!(map.disc_hits_wall(Point2::new(6.0 + d - 1e-6, 6.0 + d - 1e-6), r));
        assert!(!map.disc_hits_wall(Point2::new(6.0 + d + 1e-6, 6.0 + d + 1e-6), r));
    }

    #[test]
    fn action_codes_are_stable() {
        assert_eq!(Action::Forward.code(), 0);
        assert_eq!(Action::TurnLeft.code(), 1);
        assert_eq!(Action::TurnRight.code(), 2);
        assert_eq!(Action::from_code(3), None);
    }

    #[test]
    fn angle_helpers() {
        assert_eq!(normalize_angle(-1e-300), 0.0);
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((angle_diff(TAU - 0.1, 0.1) + 0.2).abs() < 1e-12);
    }
}
