//! The five training controls and the NDJSON control log.

use std::io::Write;

use navsim_core::trainer::{ControlEvent, Session};

use crate::error::Result;
use crate::formats::model;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Control {
    ToggleRecording,
    TrainOnce,
    ToggleAutonomous,
    SaveModel(String),
    LoadModel(String),
}

/// Applies one control. A failed load leaves the session's model untouched.
pub fn apply_control(session: &mut Session, control: Control) -> Result<()> {
    match control {
        Control::ToggleRecording => session.toggle_recording(),
        Control::ToggleAutonomous => session.toggle_autonomous(),
        Control::TrainOnce => {
            session.train_once()?;
        }
        Control::SaveModel(path) => {
            model::save(&session.params, &path)?;
            session.note_saved(path);
        }
        Control::LoadModel(path) => {
            let params = model::load(&path)?;
            session.load_params(params, path);
        }
    }
    Ok(())
}

/// Writes control events as one JSON object per line.
pub struct LogWriter<W: Write> {
    out: W,
}

impl<W: Write> LogWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, events: &[ControlEvent]) -> Result<()> {
        for e in events {
            serde_json::to_writer(&mut self.out, e)?;
            self.out.write_all(b"\n")?;
        }
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Moves the session's pending log entries into `log`, if there is one.
pub fn flush_log<W: Write>(session: &mut Session, log: Option<&mut LogWriter<W>>) -> Result<()> {
    let events = session.drain_log();
    if let Some(log) = log {
        log.write(&events)?;
    }
    Ok(())
}
