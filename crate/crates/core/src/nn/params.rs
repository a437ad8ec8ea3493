use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Real;
use crate::seed::{rng, Fnv64};

pub const LIDAR_FEATURES: usize = 64;
pub const IMAGE_FEATURES: usize = 16 * 16 * 16;
pub const FUSED_LEN: usize = LIDAR_FEATURES + IMAGE_FEATURES;

/// One named parameter tensor of the fixed architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Group {
    pub name: &'static str,
    pub shape: &'static [usize],
}

impl Group {
    pub const fn len(&self) -> usize {
        let mut n = 1;
        let mut k = 0;
        while k < self.shape.len() {
            n *= self.shape[k];
            k += 1;
        }
        n
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_bias(&self) -> bool {
        self.shape.len() == 1
    }
}

/// Parameter groups in storage (and file manifest) order. Convolution
/// kernels are `[out, ky, kx, in]`, dense weights `[out, in]`.
pub const GROUPS: [Group; 18] = [
    Group { name: "conv1.weight", shape: &[8, 4, 4, 3] },
    Group { name: "conv1.bias", shape: &[8] },
    Group { name: "conv2.weight", shape: &[16, 4, 4, 8] },
    Group { name: "conv2.bias", shape: &[16] },
    Group { name: "lidar_fc1.weight", shape: &[64, 20] },
    Group { name: "lidar_fc1.bias", shape: &[64] },
    Group { name: "lidar_fc2.weight", shape: &[64, 64] },
    Group { name: "lidar_fc2.bias", shape: &[64] },
    Group { name: "head_fc1.weight", shape: &[128, FUSED_LEN] },
    Group { name: "head_fc1.bias", shape: &[128] },
    Group { name: "head_fc2.weight", shape: &[64, 128] },
    Group { name: "head_fc2.bias", shape: &[64] },
    Group { name: "head_fc3.weight", shape: &[32, 64] },
    Group { name: "head_fc3.bias", shape: &[32] },
    Group { name: "head_fc4.weight", shape: &[16, 32] },
    Group { name: "head_fc4.bias", shape: &[16] },
    Group { name: "out.weight", shape: &[3, 16] },
    Group { name: "out.bias", shape: &[3] },
];

const fn offsets() -> [usize; GROUPS.len() + 1] {
    let mut out = [0; GROUPS.len() + 1];
    let mut k = 0;
    while k < GROUPS.len() {
        out[k + 1] = out[k] + GROUPS[k].len();
        k += 1;
    }
    out
}

pub(crate) const OFFSETS: [usize; GROUPS.len() + 1] = offsets();
pub const PARAM_COUNT: usize = OFFSETS[GROUPS.len()];

pub(crate) const CONV1_W: usize = 0;
pub(crate) const CONV2_W: usize = 2;
pub(crate) const LIDAR1_W: usize = 4;
pub(crate) const LIDAR2_W: usize = 6;
pub(crate) const HEAD1_W: usize = 8;
pub(crate) const HEAD2_W: usize = 10;
pub(crate) const HEAD3_W: usize = 12;
pub(crate) const HEAD4_W: usize = 14;
pub(crate) const OUT_W: usize = 16;

/// Every weight and bias of the network in one flat buffer, laid out group
/// after group in [`GROUPS`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T = f32> {
    data: Vec<T>,
}

/// Gradients share the parameter layout and are held in `f64`.
pub type Gradients = ModelParams<f64>;

impl<T: Real> ModelParams<T> {
    pub const PARAM_COUNT: usize = PARAM_COUNT;

    pub fn zeros() -> Self {
        Self { data: vec![T::default(); PARAM_COUNT] }
    }

    /// He-uniform (`±√(6/fan_in)`) for ReLU-feeding layers, Glorot-uniform
    /// (`±√(6/(fan_in+fan_out))`) for the output layer, zero biases.
    pub fn init(seed: u64) -> Self {
        let mut rng = rng(seed);
        let mut params = Self::zeros();
        for (g, group) in GROUPS.iter().enumerate() {
            if group.is_bias() {
                continue;
            }
            let fan_in: usize = group.shape[1..].iter().product();
            let bound = if g == OUT_W {
                libm::sqrt(6.0 / (fan_in + group.shape[0]) as f64)
            } else {
                libm::sqrt(6.0 / fan_in as f64)
            };
            for w in params.group_mut(g) {
                *w = T::from_f64((2.0 * rng.gen::<f64>() - 1.0) * bound);
            }
        }
        params
    }

    pub fn from_vec(data: Vec<T>) -> Option<Self> {
        (data.len() == PARAM_COUNT).then_some(Self { data })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn group(&self, g: usize) -> &[T] {
        &self.data[OFFSETS[g]..OFFSETS[g + 1]]
    }

    pub fn group_mut(&mut self, g: usize) -> &mut [T] {
        &mut self.data[OFFSETS[g]..OFFSETS[g + 1]]
    }

    pub fn group_offset(g: usize) -> usize {
        OFFSETS[g]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.to_f64().is_finite())
    }

    pub fn cast<U: Real>(&self) -> ModelParams<U> {
        ModelParams { data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect() }
    }

    /// FNV-1a over the little-endian `f64` image of every value.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv64::default();
        for v in &self.data {
            h.write_f64(v.to_f64());
        }
        h.finish()
    }
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        Self::zeros()
    }
}
