use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::world::{angle_diff, Action, CellIndex, EpisodeState, MapSpec, Point2, WorldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExpertError {
    #[error("goal is unreachable from the agent's cell")]
    NoPath,
    #[error("episode is over")]
    EpisodeOver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpertConfig {
    /// Heading error (radians) tolerated before the expert turns.
    pub turn_tolerance: f64,
    /// Lateral offset from a cell's centre line (cell units) beyond which
    /// the expert first re-centres before heading into the next cell.
    pub centerline_tolerance: f64,
}

impl Default for ExpertConfig {
    fn default() -> Self {
        Self { turn_tolerance: 10.0 * PI / 180.0, centerline_tolerance: 0.15 }
    }
}

/// Shortest-path demonstrator with privileged map access.
///
/// Follows the 4-connected BFS path from the agent's cell to the goal cell
/// through cell centres, turning whenever the bearing to the current
/// waypoint is off by more than `turn_tolerance`. If the agent is laterally
/// off the centre line of the next path segment it first steers back onto
/// it, which keeps the disc clear of the inner corner on turns.
pub fn scripted_expert(episode: &EpisodeState, world: &WorldConfig, config: &ExpertConfig) -> Result<Action, ExpertError> {
    if !episode.is_running() {
        return Err(ExpertError::EpisodeOver);
    }
    let map = &episode.map;
    let pos = episode.agent.position();
    let here = map.cell_of(pos).ok_or(ExpertError::NoPath)?;
    let goal_cell = map.goal_cell();
    let target = if here == goal_cell {
        map.goal
    } else {
        let next = next_cell(map, here, goal_cell).ok_or(ExpertError::NoPath)?;
        let center = MapSpec::cell_center(here);
        let u = ((next.0 as f64 - here.0 as f64), (next.1 as f64 - here.1 as f64));
        let (ox, oy) = (pos.x - center.x, pos.y - center.y);
        let along = ox * u.0 + oy * u.1;
        let lateral = -ox * u.1 + oy * u.0;
        if lateral.abs() > config.centerline_tolerance {
            let t = along.max(0.0);
            Point2::new(center.x + u.0 * t, center.y + u.1 * t)
        } else {
            MapSpec::cell_center(next)
        }
    };
    let bearing = libm::atan2(target.y - pos.y, target.x - pos.x);
    let error = angle_diff(bearing, episode.agent.theta);
    let turn = if error >= 0.0 { Action::TurnLeft } else { Action::TurnRight };
    if error.abs() > config.turn_tolerance {
        return Ok(turn);
    }
    let ahead = Point2::new(
        pos.x + world.forward_speed * libm::cos(episode.agent.theta),
        pos.y + world.forward_speed * libm::sin(episode.agent.theta),
    );
    if map.disc_hits_wall(ahead, world.agent_radius) {
        return Ok(turn);
    }
    Ok(Action::Forward)
}

/// First step of a shortest path; neighbours are scanned +x, +y, -x, -y.
fn next_cell(map: &MapSpec, from: CellIndex, goal: CellIndex) -> Option<CellIndex> {
    let dist = map.bfs_distances(goal);
    let d = dist[from.1 * map.width + from.0];
    if d == u32::MAX || d == 0 {
        return None;
    }
    map.free_neighbors(from).find(|&(i, j)| dist[j * map.width + i] == d - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{spawn_episode, Cell, Pose};
    use alloc::sync::Arc;
    use alloc::vec::Vec;

    fn l_corridor() -> MapSpec {
        // free: row 1 from x=1..=6, then column 6 from y=1..=6
        let (w, h) = (8, 8);
        let mut cells: Vec<Cell> = alloc::vec![Cell::Wall; w * h];
        for i in 1..=6 {
            cells[w + i] = Cell::Free;
            cells[i * w + 6] = Cell::Free;
        }
        MapSpec { width: w, height: h, cells, start: Pose::new(1.5, 1.5, 0.0), goal: Point2::new(6.5, 6.5), seed: 0 }
    }

    fn episode(pose: Pose) -> EpisodeState {
        let mut ep = spawn_episode(Arc::new(l_corridor()), &WorldConfig::default());
        ep.agent = pose;
        ep
    }

    #[test]
    fn aligned_in_corridor_goes_forward() {
        let a = scripted_expert(&episode(Pose::new(2.5, 1.5, 0.0)), &WorldConfig::default(), &ExpertConfig::default());
        assert_eq!(a, Ok(Action::Forward));
    }

    #[test]
    fn waypoint_to_the_left_turns_left() {
        // at the corner cell centre facing +x, path continues to +y
        let a = scripted_expert(&episode(Pose::new(6.5, 1.5, 0.0)), &WorldConfig::default(), &ExpertConfig::default());
        assert_eq!(a, Ok(Action::TurnLeft));
        let b = scripted_expert(&episode(Pose::new(6.5, 1.5, PI)), &WorldConfig::default(), &ExpertConfig::default());
        assert_eq!(b, Ok(Action::TurnRight));
    }

    #[test]
    fn drives_around_the_corner_to_the_goal() {
        let cfg = WorldConfig::default();
        let mut ep = episode(Pose::new(1.5, 1.5, 0.0));
        while ep.is_running() {
            let a = scripted_expert(&ep, &cfg, &ExpertConfig::default()).unwrap();
            ep.advance(a, &cfg).unwrap();
        }
        assert_eq!(ep.status, crate::world::Status::Success);
    }

    #[test]
    fn unreachable_goal_reports_no_path() {
        let mut map = l_corridor();
        map.cells[3 * 8 + 6] = Cell::Wall;
        let mut ep = spawn_episode(Arc::new(map), &WorldConfig::default());
        ep.agent = Pose::new(2.5, 1.5, 0.0);
        assert_eq!(scripted_expert(&ep, &WorldConfig::default(), &ExpertConfig::default()), Err(ExpertError::NoPath));
    }
}
