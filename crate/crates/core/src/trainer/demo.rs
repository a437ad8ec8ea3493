use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use super::{scripted_expert, ExpertError, SampleRecord};
use crate::config::SimConfig;
use crate::seed::rng;
use crate::sensors::{observe, SensorError};
use crate::world::{generate_map, spawn_episode, Action, Status, WorldError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Expert(#[from] ExpertError),
}

/// One expert-driven episode and the samples recorded along it.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    pub records: Vec<SampleRecord>,
    pub status: Status,
    pub steps: u32,
}

/// Drives the scripted expert on the map generated from `map_seed`,
/// recording the pre-step frame with the expert's action at every tick.
///
/// With `perturb > 0`, that fraction of ticks executes a uniformly random
/// action instead of the expert's (the recorded label is still the
/// expert's), which shows the learner how to recover from off-path states.
/// Random actions that would end the episode in a collision are replaced by
/// the expert's own.
pub fn demonstrate(map_seed: u64, config: &SimConfig, perturb: f64, noise_seed: u64) -> Result<Demonstration, DemoError> {
    let map = Arc::new(generate_map(map_seed, &config.world)?);
    let mut episode = spawn_episode(map, &config.world);
    let mut noise = rng(noise_seed);
    let mut records = Vec::new();
    while episode.is_running() {
        let obs = observe(&episode.map, &episode.agent, &config.sensors, config.world.goal_radius)?;
        let label = scripted_expert(&episode, &config.world, &config.expert)?;
        records.push(SampleRecord { frame: obs.frame, action: label });
        let mut action = label;
        if perturb > 0.0 && noise.gen::<f64>() < perturb {
            let random = Action::ALL[noise.gen_range(0..Action::ALL.len())];
            if episode.step(random, &config.world)?.status != Status::Collision {
                action = random;
            }
        }
        episode.advance(action, &config.world)?;
    }
    Ok(Demonstration { records, status: episode.status, steps: episode.tick })
}
