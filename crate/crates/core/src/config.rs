use serde::{Deserialize, Serialize};

use crate::seed::Fnv64;
use crate::sensors::SensorConfig;
use crate::trainer::ExpertConfig;
use crate::world::{GoalPlacement, Generator, WorldConfig};

/// Everything that shapes an episode: world rules, sensors and the
/// scripted demonstrator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub world: WorldConfig,
    pub sensors: SensorConfig,
    pub expert: ExpertConfig,
}

impl SimConfig {
    pub fn digest(&self) -> u64 {
        let mut h = Fnv64::default();
        let w = &self.world;
        h.write_u64(w.width as u64);
        h.write_u64(w.height as u64);
        for v in [w.forward_speed, w.turn_rate, w.agent_radius, w.goal_radius, w.braid_probability] {
            h.write_f64(v);
        }
        h.write_u64(u64::from(w.max_steps));
        h.write_u64(u64::from(w.min_goal_distance));
        h.write(&[match w.generator {
            Generator::Maze => 0,
            Generator::Cave => 1,
        }]);
        h.write(&[match w.goal_placement {
            GoalPlacement::Open => 0,
            GoalPlacement::Anywhere => 1,
        }]);
        let s = &self.sensors;
        for v in [s.lidar_max_range, s.lidar_fov, s.camera_hfov] {
            h.write_f64(v);
        }
        for c in [s.goal_color, s.wall_color_ns, s.wall_color_ew, s.floor_color, s.ceiling_color] {
            c.iter().for_each(|&v| h.write_f64(v));
        }
        h.write_f64(self.expert.turn_tolerance);
        h.write_f64(self.expert.centerline_tolerance);
        h.finish()
    }
}
