//! The LiDAR + camera fusion network, trained from scratch with SGD.
//!
//! Image path: two 4×4 stride-2 "same"-padded convolutions (8 then 16
//! filters, ReLU), flattened to 4096 features. LiDAR path: 20 → 64 → 64
//! (ReLU). The two are concatenated LiDAR-first into a 4160-wide vector and
//! fed through dense 128, 64, 32, 16 (ReLU) and a 3-way softmax whose
//! ordering follows [`Action`](crate::world::Action) codes.

mod model;
mod params;
mod scalar;
mod tensor;
mod train;

pub mod gradcheck;

pub use model::{argmax, backward, forward, forward_with_pattern, loss, predict, probabilities, ForwardTrace, LayerTrace, ReluPattern, LOSS_EPSILON};
pub use params::{Gradients, Group, ModelParams, FUSED_LEN, GROUPS, IMAGE_FEATURES, LIDAR_FEATURES};
pub use scalar::Real;
pub use tensor::Tensor;
pub use train::{accumulate_gradients, train_epoch, EpochStats, TrainConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
}
