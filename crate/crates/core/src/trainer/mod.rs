//! Interactive imitation-learning session: the demonstration buffer, the
//! five training controls and a scripted demonstrator.

mod demo;
mod expert;
mod session;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use demo::{demonstrate, DemoError, Demonstration};
pub use expert::{scripted_expert, ExpertConfig, ExpertError};
pub use session::{ControlEvent, ControlKind, Session, SessionError};

use crate::sensors::SensorFrame;
use crate::world::Action;

/// A sensor frame paired with the action the demonstrator took on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub frame: SensorFrame,
    pub action: Action,
}

/// Append-only demonstration buffer. Training shuffles an index view, so
/// insertion order is never disturbed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<SampleRecord>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<SampleRecord>) -> Self {
        Self { records }
    }

    pub fn push(&mut self, record: SampleRecord) {
        self.records.push(record);
    }

    pub fn extend(&mut self, other: Dataset) {
        self.records.extend(other.records);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    /// Borrowed `(frame, label)` pairs for training.
    pub fn samples(&self) -> Vec<(&SensorFrame, Action)> {
        self.records.iter().map(|r| (&r.frame, r.action)).collect()
    }

    pub fn action_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for r in &self.records {
            counts[r.action.index()] += 1;
        }
        counts
    }
}
