//! Central finite-difference check of the analytic gradients.
//!
//! The numeric side only ever calls `forward` and `loss`, evaluated in
//! `f64`. When a ±ε perturbation flips a ReLU on or off, the loss is not
//! differentiable across that kink; the difference is then taken on the
//! linear piece the unperturbed point lies on, by holding every ReLU at its
//! unperturbed on/off state.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{backward, forward, forward_with_pattern, loss, ReluPattern};
use super::params::{ModelParams, GROUPS};
use crate::sensors::{CameraFrame, LidarScan, SensorFrame, IMAGE_LEN, LIDAR_BEAMS};
use crate::world::Action;

pub const FD_EPSILON: f64 = 1e-3;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct GroupCheck {
    pub group: &'static str,
    pub checked: usize,
    /// Coordinates whose difference had to be taken on a frozen ReLU pattern.
    pub frozen_kinks: usize,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub groups: Vec<GroupCheck>,
    pub frames: usize,
}

impl GradcheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.checked > 0 && g.max_rel_error <= TOLERANCE)
    }
}

/// `|a - n| / max(|a|, |n|)`, taken as zero when both are below 1e-10.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-10 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

pub fn random_frame(rng: &mut ChaCha8Rng) -> SensorFrame {
    let mut ranges = [0f32; LIDAR_BEAMS];
    ranges.iter_mut().for_each(|r| *r = rng.gen());
    let pixels = (0..IMAGE_LEN).map(|_| rng.gen()).collect();
    SensorFrame { lidar: LidarScan { ranges }, image: CameraFrame { pixels } }
}

/// Central difference of the loss along parameter `index`. The flag is set
/// when the perturbation crossed a kink and the frozen pattern was used.
pub fn numeric_partial(params: &ModelParams<f64>, frame: &SensorFrame, label: Action, index: usize, eps: f64) -> (f64, bool) {
    let (_, base) = forward(params, frame).expect("valid frame");
    let pattern = base.relu_pattern();
    let mut p = params.clone();
    let orig = p.as_slice()[index];
    p.as_mut_slice()[index] = orig + eps;
    let (plus, t_plus) = forward(&p, frame).expect("valid frame");
    p.as_mut_slice()[index] = orig - eps;
    let (minus, t_minus) = forward(&p, frame).expect("valid frame");
    if t_plus.relu_pattern() == pattern && t_minus.relu_pattern() == pattern {
        return ((loss(&plus, label) - loss(&minus, label)) / (2.0 * eps), false);
    }
    (frozen_difference(&mut p, frame, label, index, orig, eps, &pattern), true)
}

fn frozen_difference(p: &mut ModelParams<f64>, frame: &SensorFrame, label: Action, index: usize, orig: f64, eps: f64, pattern: &ReluPattern) -> f64 {
    p.as_mut_slice()[index] = orig + eps;
    let (plus, _) = forward_with_pattern(p, frame, pattern).expect("valid frame");
    p.as_mut_slice()[index] = orig - eps;
    let (minus, _) = forward_with_pattern(p, frame, pattern).expect("valid frame");
    p.as_mut_slice()[index] = orig;
    (loss(&plus, label) - loss(&minus, label)) / (2.0 * eps)
}

/// Checks `per_group` random coordinates of every parameter group (all of
/// them when the group is smaller) on `frames` random frames.
pub fn run(seed: u64, frames: usize, per_group: usize) -> GradcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::<f64>::init(seed);
    // non-zero biases so every bias path is exercised
    for (g, group) in GROUPS.iter().enumerate() {
        if group.is_bias() {
            for b in params.group_mut(g) {
                *b = rng.gen_range(-0.05..0.05);
            }
        }
    }
    let mut groups: Vec<GroupCheck> =
        GROUPS.iter().map(|g| GroupCheck { group: g.name, checked: 0, frozen_kinks: 0, max_rel_error: 0.0 }).collect();

    for _ in 0..frames {
        let frame = random_frame(&mut rng);
        let label = Action::ALL[rng.gen_range(0..3)];
        let (_, trace) = forward(&params, &frame).expect("valid frame");
        let analytic = backward(&params, &trace, label);
        for (g, group) in GROUPS.iter().enumerate() {
            let offset = ModelParams::<f64>::group_offset(g);
            let n = group.len();
            let picks: Vec<usize> =
                if n <= per_group { (0..n).collect() } else { (0..per_group).map(|_| rng.gen_range(0..n)).collect() };
            for k in picks {
                let index = offset + k;
                let (numeric, frozen) = numeric_partial(&params, &frame, label, index, FD_EPSILON);
                let err = relative_error(analytic.as_slice()[index], numeric);
                let entry = &mut groups[g];
                entry.checked += 1;
                entry.frozen_kinks += usize::from(frozen);
                entry.max_rel_error = entry.max_rel_error.max(err);
            }
        }
    }
    GradcheckReport { groups, frames }
}
