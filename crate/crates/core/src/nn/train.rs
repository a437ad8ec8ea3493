use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::model::{accumulate, argmax, forward, loss};
use super::params::PARAM_COUNT;
use super::{ModelParams, NnError, Real};
use crate::seed::rng;
use crate::sensors::SensorFrame;
use crate::world::Action;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, batch_size: 32, shuffle_seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(NnError::InvalidConfig("learning_rate must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch_size must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub mean_loss: f64,
    pub accuracy: f64,
    pub samples: usize,
}

/// Sum of per-sample gradients over `samples`, in the parameter layout.
pub fn accumulate_gradients<T: Real>(params: &ModelParams<T>, samples: &[(&SensorFrame, Action)]) -> Result<Vec<f64>, NnError> {
    let traces = samples
        .iter()
        .map(|(frame, _)| forward(params, frame).map(|(_, t)| t))
        .collect::<Result<Vec<_>, _>>()?;
    let batch: Vec<_> = traces.iter().zip(samples).map(|(t, &(_, a))| (t, a)).collect();
    let mut acc = vec![0.0; PARAM_COUNT];
    accumulate(params, &batch, &mut acc);
    Ok(acc)
}

/// One pass of minibatch SGD over a seeded permutation of `samples`.
///
/// Loss and accuracy are measured on each batch before its update.
pub fn train_epoch<T: Real>(
    params: &mut ModelParams<T>,
    samples: &[(&SensorFrame, Action)],
    config: &TrainConfig,
) -> Result<EpochStats, NnError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng(config.shuffle_seed));

    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let mut acc = vec![0.0; PARAM_COUNT];
    for chunk in order.chunks(config.batch_size) {
        let mut traces = Vec::with_capacity(chunk.len());
        for &k in chunk {
            let (frame, label) = samples[k];
            let (probs, trace) = forward(params, frame)?;
            total_loss += loss(&probs, label);
            correct += usize::from(argmax(&probs) == label);
            traces.push((trace, label));
        }
        let batch: Vec<_> = traces.iter().map(|(t, a)| (t, *a)).collect();
        acc.fill(0.0);
        accumulate(params, &batch, &mut acc);
        let scale = config.learning_rate / chunk.len() as f64;
        for (p, g) in params.as_mut_slice().iter_mut().zip(&acc) {
            *p = T::from_f64(p.to_f64() - scale * g);
        }
    }
    Ok(EpochStats { mean_loss: total_loss / samples.len() as f64, accuracy: correct as f64 / samples.len() as f64, samples: samples.len() })
}
