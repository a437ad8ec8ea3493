//! JSON messages exchanged with the console over a WebSocket.
//!
//! Every message is an object with a `"type"` tag. The handler answers every
//! inbound message with at least one outbound message, and never gives up on
//! the session because of a bad one.

use std::fs::File;
use std::io::BufWriter;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use navsim_core::eval::{monte_carlo, EvalReport, ModelPolicy};
use navsim_core::nn::EpochStats;
use navsim_core::trainer::Session;
use navsim_core::world::{Action, Pose, Status};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::formats::{dataset, map::MapJson};
use crate::session::{apply_control, flush_log, Control, LogWriter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Act { action: Action },
    /// Omitting `enabled` toggles.
    SetRecording { enabled: Option<bool> },
    SetAutonomous { enabled: Option<bool> },
    Train,
    SaveModel { path: String },
    LoadModel { path: String },
    SaveDataset { path: String },
    /// Omitting `seed` restarts the current map.
    Reset { seed: Option<u64> },
    Eval { episodes: usize, seed: Option<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub tick: u32,
    pub pose: Pose,
    pub lidar: Vec<f32>,
    /// Base64 of the 64×64 RGB frame, one byte per channel.
    pub image: String,
    pub recording: bool,
    pub autonomous: bool,
    pub dataset_size: usize,
    pub status: Status,
    pub map_seed: u64,
    pub goal: [f64; 2],
    pub last_train: Option<EpochStats>,
    /// Present on connect and after a reset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State(StateMessage),
    TrainResult {
        #[serde(flatten)]
        stats: EpochStats,
        dataset_size: usize,
    },
    EvalResult(EvalReport),
    Error { message: String },
    /// Acknowledges a request that has no other reply, such as a save.
    Done { request: String },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error { message: message.into() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server message serialises")
    }
}

pub fn state_message(session: &Session, with_map: bool) -> StateMessage {
    let ep = session.episode();
    let frame = &session.observation().frame;
    StateMessage {
        tick: ep.tick,
        pose: ep.agent,
        lidar: frame.lidar.ranges.to_vec(),
        image: BASE64.encode(frame.image.to_bytes()),
        recording: session.recording(),
        autonomous: session.autonomous(),
        dataset_size: session.dataset().len(),
        status: ep.status,
        map_seed: session.map_seed(),
        goal: [ep.map.goal.x, ep.map.goal.y],
        last_train: session.last_train(),
        map: with_map.then(|| MapJson::from(&*ep.map)),
    }
}

/// Owns the session and turns inbound messages into replies.
pub struct Handler {
    pub session: Session,
    log: Option<LogWriter<BufWriter<File>>>,
}

impl Handler {
    pub fn new(session: Session, log: Option<LogWriter<BufWriter<File>>>) -> Self {
        Self { session, log }
    }

    pub fn state(&self, with_map: bool) -> ServerMessage {
        ServerMessage::State(state_message(&self.session, with_map))
    }

    /// Parses and applies one text frame.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(format!("bad message: {e}"))],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let replies = match self.apply(msg) {
            Ok(replies) => replies,
            Err(e) => vec![ServerMessage::error(e.to_string())],
        };
        if let Err(e) = flush_log(&mut self.session, self.log.as_mut()) {
            log::warn!("control log write failed: {e}");
        }
        replies
    }

    fn apply(&mut self, msg: ClientMessage) -> Result<Vec<ServerMessage>, Error> {
        let s = &mut self.session;
        // Replies that precede the trailing state message, if one is due.
        let (mut replies, send_state) = match msg {
            ClientMessage::Act { action } => {
                s.teleop_step(action)?;
                (vec![], true)
            }
            ClientMessage::SetRecording { enabled } => {
                s.set_recording(enabled.unwrap_or(!s.recording()));
                (vec![], true)
            }
            ClientMessage::SetAutonomous { enabled } => {
                s.set_autonomous(enabled.unwrap_or(!s.autonomous()));
                (vec![], true)
            }
            ClientMessage::Train => {
                apply_control(s, Control::TrainOnce)?;
                let stats = s.last_train().expect("set by a successful epoch");
                (vec![ServerMessage::TrainResult { stats, dataset_size: s.dataset().len() }], true)
            }
            ClientMessage::SaveModel { path } => {
                apply_control(s, Control::SaveModel(path))?;
                (vec![ServerMessage::Done { request: "save_model".into() }], false)
            }
            ClientMessage::LoadModel { path } => {
                apply_control(s, Control::LoadModel(path))?;
                (vec![ServerMessage::Done { request: "load_model".into() }], true)
            }
            ClientMessage::SaveDataset { path } => {
                dataset::save(s.dataset(), &path)?;
                (vec![ServerMessage::Done { request: "save_dataset".into() }], false)
            }
            ClientMessage::Reset { seed } => {
                s.reset(seed.unwrap_or(s.map_seed()))?;
                (vec![ServerMessage::State(state_message(s, true))], false)
            }
            ClientMessage::Eval { episodes, seed } => {
                let report = monte_carlo(&mut ModelPolicy(&s.params), episodes, seed.unwrap_or(0), &s.config)?;
                (vec![ServerMessage::EvalResult(report)], false)
            }
        };
        if send_state {
            replies.push(self.state(false));
        }
        Ok(replies)
    }

    /// One self-paced autonomous tick. Returns `None` when the model is not
    /// driving or the episode has ended.
    pub fn tick(&mut self) -> Option<ServerMessage> {
        if !self.session.autonomous() || !self.session.episode().is_running() {
            return None;
        }
        let reply = match self.session.autonomous_step() {
            Ok(_) => self.state(false),
            Err(e) => ServerMessage::error(e.to_string()),
        };
        if let Err(e) = flush_log(&mut self.session, self.log.as_mut()) {
            log::warn!("control log write failed: {e}");
        }
        Some(reply)
    }
}
