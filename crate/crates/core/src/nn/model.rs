use alloc::vec;
use alloc::vec::Vec;

use super::params::*;
use super::{NnError, Real, Tensor};
use crate::sensors::{SensorFrame, IMAGE_CHANNELS, IMAGE_LEN, IMAGE_SIZE, LIDAR_BEAMS};
use crate::world::Action;

pub const LOSS_EPSILON: f64 = 1e-9;

const KERNEL: usize = 4;
const CONV1_OUT: usize = 8;
const CONV2_OUT: usize = 16;
const CONV1_SIZE: usize = IMAGE_SIZE / 2;
const CONV2_SIZE: usize = CONV1_SIZE / 2;
const HEAD_WIDTHS: [usize; 4] = [128, 64, 32, 16];
const HEAD_W: [usize; 4] = [HEAD1_W, HEAD2_W, HEAD3_W, HEAD4_W];

/// Pre-activation and activation of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace<T> {
    pub pre: Tensor<T>,
    pub act: Tensor<T>,
}

/// Everything a forward pass computed, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace<T> {
    pub lidar_in: Tensor<T>,
    pub image_in: Tensor<T>,
    pub conv1: LayerTrace<T>,
    pub conv2: LayerTrace<T>,
    pub lidar1: LayerTrace<T>,
    pub lidar2: LayerTrace<T>,
    pub fused: Tensor<T>,
    pub head: [LayerTrace<T>; 4],
    pub logits: Tensor<T>,
    pub probs: [f64; 3],
}

#[inline]
fn dot<T: Real>(w: &[T], x: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), x.len());
    let mut acc = [0.0f64; 4];
    let wc = w.chunks_exact(4);
    let xc = x.chunks_exact(4);
    let (wr, xr) = (wc.remainder(), xc.remainder());
    for (a, b) in wc.zip(xc) {
        acc[0] += a[0].to_f64() * b[0];
        acc[1] += a[1].to_f64() * b[1];
        acc[2] += a[2].to_f64() * b[2];
        acc[3] += a[3].to_f64() * b[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in wr.iter().zip(xr) {
        s += a.to_f64() * b;
    }
    s
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * x;
    }
}

#[inline]
fn axpy_t<T: Real>(y: &mut [f64], a: f64, x: &[T]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * x.to_f64();
    }
}

fn to_f64<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64()).collect()
}

/// Gathers the 4×4 receptive field of output `(oy, ox)` under stride 2 and
/// one row/column of zero padding on each side.
#[inline]
fn gather_patch(input: &[f64], size: usize, ch: usize, oy: usize, ox: usize, patch: &mut [f64]) {
    for ky in 0..KERNEL {
        let iy = (2 * oy + ky) as isize - 1;
        for kx in 0..KERNEL {
            let ix = (2 * ox + kx) as isize - 1;
            let dst = &mut patch[(ky * KERNEL + kx) * ch..(ky * KERNEL + kx + 1) * ch];
            if iy < 0 || ix < 0 || iy as usize >= size || ix as usize >= size {
                dst.fill(0.0);
            } else {
                let src = (iy as usize * size + ix as usize) * ch;
                dst.copy_from_slice(&input[src..src + ch]);
            }
        }
    }
}

#[inline]
fn scatter_patch(grad: &mut [f64], size: usize, ch: usize, oy: usize, ox: usize, patch: &[f64]) {
    for ky in 0..KERNEL {
        let iy = (2 * oy + ky) as isize - 1;
        if iy < 0 || iy as usize >= size {
            continue;
        }
        for kx in 0..KERNEL {
            let ix = (2 * ox + kx) as isize - 1;
            if ix < 0 || ix as usize >= size {
                continue;
            }
            let dst = (iy as usize * size + ix as usize) * ch;
            let src = (ky * KERNEL + kx) * ch;
            for c in 0..ch {
                grad[dst + c] += patch[src + c];
            }
        }
    }
}

fn conv_forward<T: Real>(input: &[f64], size: usize, ch: usize, w: &[T], b: &[T], out_ch: usize) -> Vec<f64> {
    let out_size = size / 2;
    let k = KERNEL * KERNEL * ch;
    let w64 = to_f64(w);
    let mut patch = vec![0.0; k];
    let mut out = vec![0.0; out_size * out_size * out_ch];
    for oy in 0..out_size {
        for ox in 0..out_size {
            gather_patch(input, size, ch, oy, ox, &mut patch);
            let base = (oy * out_size + ox) * out_ch;
            for oc in 0..out_ch {
                out[base + oc] = b[oc].to_f64() + dot(&w64[oc * k..(oc + 1) * k], &patch);
            }
        }
    }
    out
}

fn dense_forward<T: Real>(x: &[f64], w: &[T], b: &[T]) -> Vec<f64> {
    let n_in = x.len();
    b.iter().enumerate().map(|(o, bias)| bias.to_f64() + dot(&w[o * n_in..(o + 1) * n_in], x)).collect()
}

/// On/off pattern of every ReLU, in forward order: conv1, conv2, lidar1,
/// lidar2, head 1–4.
pub type ReluPattern = [Vec<bool>; 8];

impl<T: Real> ForwardTrace<T> {
    pub fn relu_pattern(&self) -> ReluPattern {
        let on = |t: &Tensor<T>| t.data.iter().map(|v| v.to_f64() > 0.0).collect();
        [
            on(&self.conv1.pre),
            on(&self.conv2.pre),
            on(&self.lidar1.pre),
            on(&self.lidar2.pre),
            on(&self.head[0].pre),
            on(&self.head[1].pre),
            on(&self.head[2].pre),
            on(&self.head[3].pre),
        ]
    }
}

/// Rounds the pre-activation to storage precision and applies ReLU, or the
/// given on/off pattern when one is supplied.
fn relu_layer<T: Real>(shape: &[usize], pre: &[f64], pattern: Option<&[bool]>) -> (LayerTrace<T>, Vec<f64>) {
    let pre = Tensor::<T>::from_f64(shape, pre);
    let act = Tensor {
        shape: pre.shape.clone(),
        data: pre
            .data
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let on = match pattern {
                    Some(p) => p[k],
                    None => v.to_f64() > 0.0,
                };
                if on {
                    v
                } else {
                    T::default()
                }
            })
            .collect(),
    };
    let next = to_f64(&act.data);
    (LayerTrace { pre, act }, next)
}

/// Numerically stable softmax in `f64`.
pub fn probabilities(logits: &[f64; 3]) -> [f64; 3] {
    let m = logits[0].max(logits[1]).max(logits[2]);
    let e = logits.map(|l| libm::exp(l - m));
    let s = e[0] + e[1] + e[2];
    e.map(|v| v / s)
}

/// Lowest-index argmax.
pub fn argmax(probs: &[f64; 3]) -> Action {
    let mut best = 0;
    for k in 1..3 {
        if probs[k] > probs[best] {
            best = k;
        }
    }
    Action::ALL[best]
}

/// Categorical cross-entropy `-ln(p[label] + ε)`.
pub fn loss(probs: &[f64; 3], label: Action) -> f64 {
    -libm::log(probs[label.index()] + LOSS_EPSILON)
}

fn check_frame(frame: &SensorFrame) -> Result<(), NnError> {
    if frame.image.pixels.len() != IMAGE_LEN {
        return Err(NnError::ShapeMismatch { expected: IMAGE_LEN, found: frame.image.pixels.len() });
    }
    Ok(())
}

pub fn forward<T: Real>(params: &ModelParams<T>, frame: &SensorFrame) -> Result<([f64; 3], ForwardTrace<T>), NnError> {
    forward_impl(params, frame, None)
}

/// Forward pass with every ReLU forced to the given on/off pattern, i.e. the
/// linear piece of the network that `pattern` selects.
pub fn forward_with_pattern<T: Real>(
    params: &ModelParams<T>,
    frame: &SensorFrame,
    pattern: &ReluPattern,
) -> Result<([f64; 3], ForwardTrace<T>), NnError> {
    forward_impl(params, frame, Some(pattern))
}

fn forward_impl<T: Real>(
    params: &ModelParams<T>,
    frame: &SensorFrame,
    pattern: Option<&ReluPattern>,
) -> Result<([f64; 3], ForwardTrace<T>), NnError> {
    check_frame(frame)?;
    let mask = |k: usize| pattern.map(|p| p[k].as_slice());
    let lidar_in = Tensor::<T>::from_f64(&[LIDAR_BEAMS], &frame.lidar.ranges.map(f64::from));
    let image_f64: Vec<f64> = frame.image.pixels.iter().map(|&v| f64::from(v)).collect();
    let image_in = Tensor::<T>::from_f64(&[IMAGE_SIZE, IMAGE_SIZE, IMAGE_CHANNELS], &image_f64);
    let image_x = to_f64(&image_in.data);

    let pre = conv_forward(&image_x, IMAGE_SIZE, IMAGE_CHANNELS, params.group(CONV1_W), params.group(CONV1_W + 1), CONV1_OUT);
    let (conv1, x1) = relu_layer(&[CONV1_SIZE, CONV1_SIZE, CONV1_OUT], &pre, mask(0));
    let pre = conv_forward(&x1, CONV1_SIZE, CONV1_OUT, params.group(CONV2_W), params.group(CONV2_W + 1), CONV2_OUT);
    let (conv2, x2) = relu_layer(&[CONV2_SIZE, CONV2_SIZE, CONV2_OUT], &pre, mask(1));

    let lx = to_f64(&lidar_in.data);
    let pre = dense_forward(&lx, params.group(LIDAR1_W), params.group(LIDAR1_W + 1));
    let (lidar1, lx) = relu_layer(&[LIDAR_FEATURES], &pre, mask(2));
    let pre = dense_forward(&lx, params.group(LIDAR2_W), params.group(LIDAR2_W + 1));
    let (lidar2, lx) = relu_layer(&[LIDAR_FEATURES], &pre, mask(3));

    let mut fused_x = lx;
    fused_x.extend_from_slice(&x2);
    let fused = Tensor::<T>::from_f64(&[FUSED_LEN], &fused_x);

    let mut x = fused_x;
    let mut head: [Option<LayerTrace<T>>; 4] = Default::default();
    for (k, slot) in head.iter_mut().enumerate() {
        let pre = dense_forward(&x, params.group(HEAD_W[k]), params.group(HEAD_W[k] + 1));
        let (layer, next) = relu_layer(&[HEAD_WIDTHS[k]], &pre, mask(4 + k));
        *slot = Some(layer);
        x = next;
    }
    let head = head.map(|l| l.expect("all head layers computed"));

    let z = dense_forward(&x, params.group(OUT_W), params.group(OUT_W + 1));
    let logits = Tensor::<T>::from_f64(&[3], &z);
    let l = to_f64(&logits.data);
    let probs = probabilities(&[l[0], l[1], l[2]]);
    Ok((probs, ForwardTrace { lidar_in, image_in, conv1, conv2, lidar1, lidar2, fused, head, logits, probs }))
}

pub fn predict<T: Real>(params: &ModelParams<T>, frame: &SensorFrame) -> Result<Action, NnError> {
    forward(params, frame).map(|(probs, _)| argmax(&probs))
}

/// Input activations and output-side deltas of one dense layer for one sample.
struct DenseDelta {
    group: usize,
    x: Vec<f64>,
    dz: Vec<f64>,
}

fn relu_mask<T: Real>(grad: &mut [f64], pre: &Tensor<T>) {
    for (g, p) in grad.iter_mut().zip(&pre.data) {
        if p.to_f64() <= 0.0 {
            *g = 0.0;
        }
    }
}

/// `dx = Wᵀ dz` for a dense layer with weights `[out, in]`.
fn dense_input_grad<T: Real>(w: &[T], dz: &[f64], n_in: usize) -> Vec<f64> {
    let mut dx = vec![0.0; n_in];
    for (o, &d) in dz.iter().enumerate() {
        if d != 0.0 {
            axpy_t(&mut dx, d, &w[o * n_in..(o + 1) * n_in]);
        }
    }
    dx
}

fn conv_backward<T: Real>(
    input: &[f64],
    size: usize,
    ch: usize,
    dz: &[f64],
    out_ch: usize,
    w: &[T],
    wg: usize,
    acc: &mut [f64],
    input_grad: Option<&mut [f64]>,
) {
    let out_size = size / 2;
    let k = KERNEL * KERNEL * ch;
    let w_off = OFFSETS[wg];
    let b_off = OFFSETS[wg + 1];
    let w64 = to_f64(w);
    let mut patch = vec![0.0; k];
    let mut dpatch = vec![0.0; k];
    let mut input_grad = input_grad;
    for oy in 0..out_size {
        for ox in 0..out_size {
            let base = (oy * out_size + ox) * out_ch;
            let deltas = &dz[base..base + out_ch];
            if deltas.iter().all(|&d| d == 0.0) {
                continue;
            }
            gather_patch(input, size, ch, oy, ox, &mut patch);
            dpatch.fill(0.0);
            for (oc, &d) in deltas.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                acc[b_off + oc] += d;
                axpy(&mut acc[w_off + oc * k..w_off + (oc + 1) * k], d, &patch);
                if input_grad.is_some() {
                    axpy(&mut dpatch, d, &w64[oc * k..(oc + 1) * k]);
                }
            }
            if let Some(g) = input_grad.as_deref_mut() {
                scatter_patch(g, size, ch, oy, ox, &dpatch);
            }
        }
    }
}

/// Adds the summed cross-entropy gradients of `batch` into `acc`, which
/// uses the parameter layout. Dense weight gradients are reduced over the
/// batch in sample order, one output row at a time.
pub(crate) fn accumulate<T: Real>(params: &ModelParams<T>, batch: &[(&ForwardTrace<T>, Action)], acc: &mut [f64]) {
    assert_eq!(acc.len(), PARAM_COUNT);
    let mut dense: Vec<Vec<DenseDelta>> = (0..7).map(|_| Vec::with_capacity(batch.len())).collect();

    for &(trace, label) in batch {
        let mut dz: Vec<f64> = trace.probs.to_vec();
        dz[label.index()] -= 1.0;

        // output and head stack
        let layers = [
            (OUT_W, &trace.head[3].act, None),
            (HEAD4_W, &trace.head[2].act, Some(&trace.head[3].pre)),
            (HEAD3_W, &trace.head[1].act, Some(&trace.head[2].pre)),
            (HEAD2_W, &trace.head[0].act, Some(&trace.head[1].pre)),
            (HEAD1_W, &trace.fused, Some(&trace.head[0].pre)),
        ];
        for (slot, (g, x, pre)) in layers.into_iter().enumerate() {
            if let Some(pre) = pre {
                relu_mask(&mut dz, pre);
            }
            let x = to_f64(&x.data);
            let dx = dense_input_grad(params.group(g), &dz, x.len());
            dense[slot].push(DenseDelta { group: g, x, dz });
            dz = dx;
        }
        let d_fused = dz;

        // LiDAR branch
        let mut dz = d_fused[..LIDAR_FEATURES].to_vec();
        relu_mask(&mut dz, &trace.lidar2.pre);
        let x = to_f64(&trace.lidar1.act.data);
        let mut dx = dense_input_grad(params.group(LIDAR2_W), &dz, LIDAR_FEATURES);
        dense[5].push(DenseDelta { group: LIDAR2_W, x, dz });
        relu_mask(&mut dx, &trace.lidar1.pre);
        dense[6].push(DenseDelta { group: LIDAR1_W, x: to_f64(&trace.lidar_in.data), dz: dx });

        // image branch
        let mut dz2 = d_fused[LIDAR_FEATURES..].to_vec();
        relu_mask(&mut dz2, &trace.conv2.pre);
        let act1 = to_f64(&trace.conv1.act.data);
        let mut dz1 = vec![0.0; act1.len()];
        conv_backward(&act1, CONV1_SIZE, CONV1_OUT, &dz2, CONV2_OUT, params.group(CONV2_W), CONV2_W, acc, Some(&mut dz1));
        relu_mask(&mut dz1, &trace.conv1.pre);
        let image = to_f64(&trace.image_in.data);
        conv_backward(&image, IMAGE_SIZE, IMAGE_CHANNELS, &dz1, CONV1_OUT, params.group(CONV1_W), CONV1_W, acc, None);
    }

    for layer in &dense {
        let Some(first) = layer.first() else { continue };
        let (g, n_in, n_out) = (first.group, first.x.len(), first.dz.len());
        let (w_off, b_off) = (OFFSETS[g], OFFSETS[g + 1]);
        for o in 0..n_out {
            let row = &mut acc[w_off + o * n_in..w_off + (o + 1) * n_in];
            let mut bias = 0.0;
            for s in layer {
                let d = s.dz[o];
                bias += d;
                if d != 0.0 {
                    axpy(row, d, &s.x);
                }
            }
            acc[b_off + o] += bias;
        }
    }
}

/// Exact gradients of the cross-entropy loss for one sample.
pub fn backward<T: Real>(params: &ModelParams<T>, trace: &ForwardTrace<T>, label: Action) -> Gradients {
    let mut acc = vec![0.0; PARAM_COUNT];
    accumulate(params, &[(trace, label)], &mut acc);
    Gradients::from_vec(acc).expect("layout length")
}
