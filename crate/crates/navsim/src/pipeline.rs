//! Headless record → train → evaluate steps shared by the CLI and tests.

use navsim_core::eval::{monte_carlo, EvalReport, ModelPolicy};
use navsim_core::nn::{train_epoch, EpochStats, ModelParams, TrainConfig};
use navsim_core::seed::split_seed;
use navsim_core::trainer::{demonstrate, Dataset};
use navsim_core::world::Status;
use navsim_core::SimConfig;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub dataset: Dataset,
    /// Final status of each expert episode, by map index.
    pub outcomes: Vec<Status>,
}

/// Records one expert episode on each of `maps` maps. Map `i` is generated
/// from `split_seed(seed, i)`; its perturbation stream from
/// `split_seed(!seed, i)`.
pub fn record_expert(config: &SimConfig, maps: usize, seed: u64, perturb: f64) -> Result<Recording> {
    if !(0.0..=1.0).contains(&perturb) {
        return Err(Error::Config(format!("perturb must lie in [0, 1], got {perturb}")));
    }
    let mut dataset = Dataset::new();
    let mut outcomes = Vec::with_capacity(maps);
    for i in 0..maps as u64 {
        let demo = demonstrate(split_seed(seed, i), config, perturb, split_seed(!seed, i))?;
        log::debug!("map {i}: {:?} after {} steps", demo.status, demo.steps);
        outcomes.push(demo.status);
        demo.records.into_iter().for_each(|r| dataset.push(r));
    }
    Ok(Recording { dataset, outcomes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self { epochs: 30, learning_rate: t.learning_rate, batch_size: t.batch_size, seed: 0 }
    }
}

/// Fresh weights for a training run seeded with `seed`.
pub fn initial_params(seed: u64) -> ModelParams {
    ModelParams::init(split_seed(seed, 0))
}

/// Runs `epochs` epochs; epoch `e` shuffles with `split_seed(seed, e + 1)`.
/// `on_epoch` sees each epoch's statistics as they are produced.
pub fn train(
    params: &mut ModelParams,
    dataset: &Dataset,
    opts: &TrainOptions,
    mut on_epoch: impl FnMut(usize, &EpochStats),
) -> Result<Vec<EpochStats>> {
    let samples = dataset.samples();
    let mut history = Vec::with_capacity(opts.epochs);
    for e in 0..opts.epochs {
        let cfg = TrainConfig { learning_rate: opts.learning_rate, batch_size: opts.batch_size, shuffle_seed: split_seed(opts.seed, e as u64 + 1) };
        let stats = train_epoch(params, &samples, &cfg)?;
        on_epoch(e, &stats);
        history.push(stats);
    }
    Ok(history)
}

pub fn evaluate(params: &ModelParams, episodes: usize, seed: u64, config: &SimConfig) -> Result<EvalReport> {
    Ok(monte_carlo(&mut ModelPolicy(params), episodes, seed, config)?)
}
