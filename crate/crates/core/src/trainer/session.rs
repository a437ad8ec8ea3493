use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{scripted_expert, Dataset, ExpertError, SampleRecord};
use crate::config::SimConfig;
use crate::nn::{predict, train_epoch, EpochStats, ModelParams, NnError, TrainConfig};
use crate::seed::SeedStream;
use crate::sensors::{observe, Observation, SensorError};
use crate::world::{generate_map, spawn_episode, Action, EpisodeState, Status, WorldError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("episode is over")]
    EpisodeOver,
    #[error("autonomous mode is active")]
    AutonomousActive,
    #[error("autonomous mode is off")]
    NotAutonomous,
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Nn(NnError),
    #[error(transparent)]
    Expert(#[from] ExpertError),
}

impl From<NnError> for SessionError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::EmptyDataset => SessionError::EmptyDataset,
            other => SessionError::Nn(other),
        }
    }
}

/// One entry of the control log: `{tick, event, payload}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlEvent {
    pub tick: u32,
    #[serde(flatten)]
    pub kind: ControlKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "payload", rename_all = "snake_case")]
pub enum ControlKind {
    Recording { enabled: bool },
    Autonomous { enabled: bool },
    Train { shuffle_seed: u64, stats: EpochStats },
    SaveModel { path: String },
    LoadModel { path: String },
    Reset { map_seed: u64 },
    Act { action: Action, recorded: bool, autonomous: bool },
}

/// A single demonstrator's training session. Controls and steps are applied
/// one at a time, in call order.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: SimConfig,
    pub train_config: TrainConfig,
    pub params: ModelParams,
    episode: EpisodeState,
    observation: Observation,
    dataset: Dataset,
    recording: bool,
    autonomous: bool,
    last_train: Option<EpochStats>,
    map_seed: u64,
    shuffle_seeds: SeedStream,
    log: Vec<ControlEvent>,
}

impl Session {
    /// Starts on a fresh map generated from `map_seed`. Per-epoch shuffle
    /// seeds are drawn from a stream seeded with `session_seed`.
    pub fn new(config: SimConfig, train_config: TrainConfig, params: ModelParams, map_seed: u64, session_seed: u64) -> Result<Self, SessionError> {
        let (episode, observation) = Self::fresh_episode(&config, map_seed)?;
        Ok(Self {
            config,
            train_config,
            params,
            episode,
            observation,
            dataset: Dataset::new(),
            recording: false,
            autonomous: false,
            last_train: None,
            map_seed,
            shuffle_seeds: SeedStream::new(session_seed),
            log: Vec::new(),
        })
    }

    fn fresh_episode(config: &SimConfig, map_seed: u64) -> Result<(EpisodeState, Observation), SessionError> {
        let map = Arc::new(generate_map(map_seed, &config.world)?);
        let episode = spawn_episode(map, &config.world);
        let observation = observe(&episode.map, &episode.agent, &config.sensors, config.world.goal_radius)?;
        Ok((episode, observation))
    }

    pub fn episode(&self) -> &EpisodeState {
        &self.episode
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn recording(&self) -> bool {
        self.recording
    }

    pub fn autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn last_train(&self) -> Option<EpochStats> {
        self.last_train
    }

    pub fn map_seed(&self) -> u64 {
        self.map_seed
    }

    pub fn log(&self) -> &[ControlEvent] {
        &self.log
    }

    /// Removes and returns the log entries accumulated so far.
    pub fn drain_log(&mut self) -> Vec<ControlEvent> {
        core::mem::take(&mut self.log)
    }

    fn push_log(&mut self, kind: ControlKind) {
        self.log.push(ControlEvent { tick: self.episode.tick, kind });
    }

    pub fn set_recording(&mut self, enabled: bool) {
        if enabled && self.autonomous {
            self.autonomous = false;
            self.push_log(ControlKind::Autonomous { enabled: false });
        }
        self.recording = enabled;
        self.push_log(ControlKind::Recording { enabled });
    }

    pub fn toggle_recording(&mut self) {
        self.set_recording(!self.recording);
    }

    pub fn set_autonomous(&mut self, enabled: bool) {
        if enabled && self.recording {
            self.recording = false;
            self.push_log(ControlKind::Recording { enabled: false });
        }
        self.autonomous = enabled;
        self.push_log(ControlKind::Autonomous { enabled });
    }

    pub fn toggle_autonomous(&mut self) {
        self.set_autonomous(!self.autonomous);
    }

    /// Fits the model for exactly one epoch on the current dataset.
    pub fn train_once(&mut self) -> Result<EpochStats, SessionError> {
        if self.dataset.is_empty() {
            return Err(SessionError::EmptyDataset);
        }
        let shuffle_seed = self.shuffle_seeds.next_seed();
        let cfg = TrainConfig { shuffle_seed, ..self.train_config.clone() };
        let mut params = self.params.clone();
        let stats = train_epoch(&mut params, &self.dataset.samples(), &cfg)?;
        self.params = params;
        self.last_train = Some(stats);
        self.push_log(ControlKind::Train { shuffle_seed, stats });
        Ok(stats)
    }

    /// Swaps in externally loaded weights.
    pub fn load_params(&mut self, params: ModelParams, source: String) {
        self.params = params;
        self.push_log(ControlKind::LoadModel { path: source });
    }

    pub fn note_saved(&mut self, destination: String) {
        self.push_log(ControlKind::SaveModel { path: destination });
    }

    /// Starts a new episode on the map generated from `map_seed`; the
    /// dataset and model are kept.
    pub fn reset(&mut self, map_seed: u64) -> Result<(), SessionError> {
        let (episode, observation) = Self::fresh_episode(&self.config, map_seed)?;
        self.episode = episode;
        self.observation = observation;
        self.map_seed = map_seed;
        self.push_log(ControlKind::Reset { map_seed });
        Ok(())
    }

    fn advance(&mut self, action: Action) -> Result<Status, SessionError> {
        let status = self.episode.advance(action, &self.config.world).map_err(|e| match e {
            WorldError::EpisodeOver => SessionError::EpisodeOver,
            other => SessionError::World(other),
        })?;
        self.observation = observe(&self.episode.map, &self.episode.agent, &self.config.sensors, self.config.world.goal_radius)?;
        Ok(status)
    }

    /// Applies the demonstrator's action. While recording, the frame the
    /// demonstrator reacted to is stored with the action before stepping.
    pub fn teleop_step(&mut self, action: Action) -> Result<Status, SessionError> {
        if self.autonomous {
            return Err(SessionError::AutonomousActive);
        }
        if !self.episode.is_running() {
            return Err(SessionError::EpisodeOver);
        }
        if self.recording {
            self.dataset.push(SampleRecord { frame: self.observation.frame.clone(), action });
        }
        self.push_log(ControlKind::Act { action, recorded: self.recording, autonomous: false });
        self.advance(action)
    }

    /// Lets the model drive one tick with its top predicted action.
    pub fn autonomous_step(&mut self) -> Result<Action, SessionError> {
        if !self.autonomous {
            return Err(SessionError::NotAutonomous);
        }
        if !self.episode.is_running() {
            return Err(SessionError::EpisodeOver);
        }
        let action = predict(&self.params, &self.observation.frame)?;
        self.push_log(ControlKind::Act { action, recorded: false, autonomous: true });
        self.advance(action)?;
        Ok(action)
    }

    /// The scripted demonstrator's choice for the current state.
    pub fn expert_action(&self) -> Result<Action, SessionError> {
        Ok(scripted_expert(&self.episode, &self.config.world, &self.config.expert)?)
    }
}
