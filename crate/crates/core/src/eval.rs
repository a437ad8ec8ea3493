//! Monte Carlo evaluation: independent randomized episodes, each on a
//! freshly generated map, scored by the fraction that reach the goal.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::nn::{predict, ModelParams, NnError};
use crate::seed::{split_seed, Fnv64};
use crate::sensors::{observe, Observation, SensorError};
use crate::trainer::{scripted_expert, ExpertError};
use crate::world::{generate_map, spawn_episode, Action, EpisodeState, Status, WorldError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("n_episodes must be at least 1")]
    NoEpisodes,
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Expert(#[from] ExpertError),
}

/// Anything that can drive an episode.
pub trait Policy {
    fn act(&mut self, episode: &EpisodeState, observation: &Observation) -> Result<Action, EvalError>;

    /// Identifies the policy in reports.
    fn digest(&self) -> u64;
}

/// Greedy policy of a trained model.
pub struct ModelPolicy<'a>(pub &'a ModelParams);

impl Policy for ModelPolicy<'_> {
    fn act(&mut self, _episode: &EpisodeState, observation: &Observation) -> Result<Action, EvalError> {
        Ok(predict(self.0, &observation.frame)?)
    }

    fn digest(&self) -> u64 {
        self.0.digest()
    }
}

/// The scripted demonstrator, driving with privileged map access.
pub struct ExpertPolicy<'a>(pub &'a SimConfig);

impl Policy for ExpertPolicy<'_> {
    fn act(&mut self, episode: &EpisodeState, _observation: &Observation) -> Result<Action, EvalError> {
        Ok(scripted_expert(episode, &self.0.world, &self.0.expert)?)
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write(b"scripted-expert");
        h.finish()
    }
}

/// Emits one fixed action forever.
pub struct ConstantPolicy(pub Action);

impl Policy for ConstantPolicy {
    fn act(&mut self, _: &EpisodeState, _: &Observation) -> Result<Action, EvalError> {
        Ok(self.0)
    }

    fn digest(&self) -> u64 {
        u64::from(self.0.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub index: u64,
    pub map_seed: u64,
    pub status: Status,
    pub steps: u32,
    /// Whether the goal appeared in any camera frame during the episode.
    pub goal_seen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_digest: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub n_episodes: usize,
    /// Successes divided by episodes.
    pub accuracy: f64,
    pub avg_steps_all: f64,
    pub avg_steps_success: Option<f64>,
    pub episodes: Vec<EpisodeOutcome>,
}

impl EvalReport {
    pub fn successes(&self) -> usize {
        self.episodes.iter().filter(|e| e.status == Status::Success).count()
    }

    /// Builds the summary fields from an episode list.
    pub fn from_episodes(episodes: Vec<EpisodeOutcome>, master_seed: u64, model_digest: u64, config_digest: u64) -> Self {
        let n = episodes.len();
        let successes: Vec<&EpisodeOutcome> = episodes.iter().filter(|e| e.status == Status::Success).collect();
        let mean = |xs: &mut dyn Iterator<Item = u32>, count: usize| xs.map(f64::from).sum::<f64>() / count as f64;
        let avg_steps_all = if n == 0 { 0.0 } else { mean(&mut episodes.iter().map(|e| e.steps), n) };
        let avg_steps_success = (!successes.is_empty()).then(|| mean(&mut successes.iter().map(|e| e.steps), successes.len()));
        let accuracy = if n == 0 { 0.0 } else { successes.len() as f64 / n as f64 };
        Self {
            model_digest: format!("{model_digest:016x}"),
            config_digest: format!("{config_digest:016x}"),
            master_seed,
            n_episodes: n,
            accuracy,
            avg_steps_all,
            avg_steps_success,
            episodes,
        }
    }
}

/// Runs one episode on the map generated from `map_seed` until it ends.
pub fn run_episode<P: Policy + ?Sized>(policy: &mut P, index: u64, map_seed: u64, config: &SimConfig) -> Result<EpisodeOutcome, EvalError> {
    let map = Arc::new(generate_map(map_seed, &config.world)?);
    let mut episode = spawn_episode(map, &config.world);
    let mut goal_seen = false;
    while episode.is_running() {
        let obs = observe(&episode.map, &episode.agent, &config.sensors, config.world.goal_radius)?;
        goal_seen |= obs.goal_visible;
        let action = policy.act(&episode, &obs)?;
        episode.advance(action, &config.world)?;
    }
    Ok(EpisodeOutcome { index, map_seed, status: episode.status, steps: episode.tick, goal_seen })
}

/// Evaluates `policy` on `n_episodes` maps seeded by
/// `split_seed(master_seed, i)`. Episodes are listed in index order.
pub fn monte_carlo<P: Policy + ?Sized>(policy: &mut P, n_episodes: usize, master_seed: u64, config: &SimConfig) -> Result<EvalReport, EvalError> {
    if n_episodes == 0 {
        return Err(EvalError::NoEpisodes);
    }
    let episodes = (0..n_episodes as u64)
        .map(|i| run_episode(policy, i, split_seed(master_seed, i), config))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::from_episodes(episodes, master_seed, policy.digest(), config.digest()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn outcome(i: u64, status: Status, steps: u32) -> EpisodeOutcome {
        EpisodeOutcome { index: i, map_seed: i, status, steps, goal_seen: false }
    }

    #[test]
    fn seventeen_of_twenty_is_085() {
        let eps: Vec<_> = (0..20).map(|i| outcome(i, if i < 17 { Status::Success } else { Status::Collision }, 100 + i as u32)).collect();
        let r = EvalReport::from_episodes(eps, 0, 0, 0);
        assert_eq!(r.accuracy, 0.85);
        assert_eq!(r.successes(), 17);
    }

    #[test]
    fn no_successes_has_no_success_mean() {
        let r = EvalReport::from_episodes(vec![outcome(0, Status::Timeout, 10), outcome(1, Status::Collision, 4)], 0, 0, 0);
        assert_eq!(r.accuracy, 0.0);
        assert_eq!(r.avg_steps_all, 7.0);
        assert_eq!(r.avg_steps_success, None);
    }

    #[test]
    fn zero_episodes_rejected() {
        let cfg = SimConfig::default();
        assert_eq!(monte_carlo(&mut ConstantPolicy(Action::Forward), 0, 1, &cfg), Err(EvalError::NoEpisodes));
    }

    #[test]
    fn spinning_policy_times_out() {
        let mut cfg = SimConfig::default();
        cfg.world.max_steps = 300;
        let out = run_episode(&mut ConstantPolicy(Action::TurnLeft), 0, 5, &cfg).unwrap();
        assert_eq!(out.status, Status::Timeout);
        assert_eq!(out.steps, 300);
    }
}
