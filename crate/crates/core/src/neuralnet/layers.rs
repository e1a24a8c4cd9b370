//! Layer kernels. Feature maps are stored height x width x channels.

use serde::{Deserialize, Serialize};

use super::{NnError, Tensor};

/// Square convolution with stride 1 and "same" zero padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvLayer {
    /// Shape `(k, k, c_in, c_out)`.
    pub kernels: Tensor,
    pub bias: Vec<f64>,
}

impl ConvLayer {
    pub fn zeros(k: usize, c_in: usize, c_out: usize) -> Self {
        Self {
            kernels: Tensor::zeros(&[k, k, c_in, c_out]),
            bias: vec![0.0; c_out],
        }
    }

    pub fn kernel_size(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[2]
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.shape()[3]
    }
}

/// Fully connected layer, `out = x W + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// Shape `(n_in, n_out)`.
    pub weights: Tensor,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            weights: Tensor::zeros(&[n_in, n_out]),
            bias: vec![0.0; n_out],
        }
    }

    pub fn n_in(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn n_out(&self) -> usize {
        self.weights.shape()[1]
    }
}

fn hwc(t: &Tensor) -> Result<(usize, usize, usize), NnError> {
    match *t.shape() {
        [h, w, c] => Ok((h, w, c)),
        ref s => Err(NnError::ShapeMismatch(format!("expected an HxWxC tensor, got {s:?}"))),
    }
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn conv2d_forward(input: &Tensor, layer: &ConvLayer) -> Result<Tensor, NnError> {
    let (h, w, c_in) = hwc(input)?;
    let k = layer.kernel_size();
    let c_out = layer.out_channels();
    if c_in != layer.in_channels() {
        return Err(NnError::ShapeMismatch(format!(
            "input has {c_in} channels, layer expects {}",
            layer.in_channels()
        )));
    }
    if k.is_multiple_of(2) {
        return Err(NnError::ShapeMismatch(format!("kernel size {k} must be odd")));
    }
    let pad = k / 2;
    let x = input.data();
    let kern = layer.kernels.data();
    let mut out = vec![0.0; h * w * c_out];

    for y in 0..h {
        for xo in 0..w {
            let o = &mut out[(y * w + xo) * c_out..][..c_out];
            o.copy_from_slice(&layer.bias);
            for dy in 0..k {
                let Some(iy) = (y + dy).checked_sub(pad).filter(|&v| v < h) else {
                    continue;
                };
                for dx in 0..k {
                    let Some(ix) = (xo + dx).checked_sub(pad).filter(|&v| v < w) else {
                        continue;
                    };
                    let px = &x[(iy * w + ix) * c_in..][..c_in];
                    let kblock = &kern[(dy * k + dx) * c_in * c_out..][..c_in * c_out];
                    for (i, &a) in px.iter().enumerate() {
                        if a != 0.0 {
                            axpy(o, a, &kblock[i * c_out..][..c_out]);
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::from_vec(vec![h, w, c_out], out))
}

/// Accumulates kernel and bias gradients into `grad` and returns the input
/// gradient when `want_input_grad` is set.
pub fn conv2d_backward(
    input: &Tensor,
    layer: &ConvLayer,
    d_out: &Tensor,
    grad: &mut ConvLayer,
    want_input_grad: bool,
) -> Result<Option<Tensor>, NnError> {
    let (h, w, c_in) = hwc(input)?;
    let k = layer.kernel_size();
    let c_out = layer.out_channels();
    if d_out.shape() != [h, w, c_out] {
        return Err(NnError::ShapeMismatch(format!(
            "output gradient {:?} does not match {:?}",
            d_out.shape(),
            [h, w, c_out]
        )));
    }
    let pad = k / 2;
    let x = input.data();
    let g = d_out.data();
    let kern = layer.kernels.data();
    let mut d_in = want_input_grad.then(|| vec![0.0; h * w * c_in]);
    let dk = grad.kernels.data_mut();

    for y in 0..h {
        for xo in 0..w {
            let go = &g[(y * w + xo) * c_out..][..c_out];
            if go.iter().all(|&v| v == 0.0) {
                continue;
            }
            axpy(&mut grad.bias, 1.0, go);
            for dy in 0..k {
                let Some(iy) = (y + dy).checked_sub(pad).filter(|&v| v < h) else {
                    continue;
                };
                for dx in 0..k {
                    let Some(ix) = (xo + dx).checked_sub(pad).filter(|&v| v < w) else {
                        continue;
                    };
                    let base = (iy * w + ix) * c_in;
                    let block = (dy * k + dx) * c_in * c_out;
                    for i in 0..c_in {
                        let a = x[base + i];
                        if a != 0.0 {
                            axpy(&mut dk[block + i * c_out..][..c_out], a, go);
                        }
                    }
                    if let Some(d) = d_in.as_mut() {
                        for i in 0..c_in {
                            d[base + i] += dot(&kern[block + i * c_out..][..c_out], go);
                        }
                    }
                }
            }
        }
    }
    Ok(d_in.map(|d| Tensor::from_vec(vec![h, w, c_in], d)))
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Masks `d_out` by the forward input; the subgradient at exactly 0 is 0.
pub fn relu_backward(pre_activation: &Tensor, d_out: &Tensor) -> Tensor {
    let data = pre_activation
        .data()
        .iter()
        .zip(d_out.data())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(d_out.shape().to_vec(), data)
}

/// 2x2 max pooling with stride 2. Also returns, per output value, the flat
/// input index of the winner (first in row-major order on ties).
pub fn maxpool_forward(input: &Tensor) -> Result<(Tensor, Vec<usize>), NnError> {
    let (h, w, c) = hwc(input)?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(NnError::OddDimension { h, w });
    }
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(oh * ow * c);
    let mut arg = Vec::with_capacity(oh * ow * c);
    for y in 0..oh {
        for xo in 0..ow {
            for ch in 0..c {
                let mut best = ((2 * y) * w + 2 * xo) * c + ch;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = ((2 * y + dy) * w + 2 * xo + dx) * c + ch;
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                out.push(x[best]);
                arg.push(best);
            }
        }
    }
    Ok((Tensor::from_vec(vec![oh, ow, c], out), arg))
}

pub fn maxpool_backward(input_shape: &[usize], argmax: &[usize], d_out: &Tensor) -> Tensor {
    let mut d_in = Tensor::zeros(input_shape);
    let d = d_in.data_mut();
    for (&idx, &g) in argmax.iter().zip(d_out.data()) {
        d[idx] += g;
    }
    d_in
}

/// Row-major linearization.
pub fn flatten(input: &Tensor) -> Tensor {
    let n = input.len();
    input.clone().reshape(&[n])
}

pub fn dense_forward(input: &[f64], layer: &DenseLayer) -> Result<Vec<f64>, NnError> {
    let (n_in, n_out) = (layer.n_in(), layer.n_out());
    if input.len() != n_in {
        return Err(NnError::ShapeMismatch(format!(
            "dense layer expects {n_in} inputs, got {}",
            input.len()
        )));
    }
    let w = layer.weights.data();
    let mut out = layer.bias.clone();
    for (i, &a) in input.iter().enumerate() {
        if a != 0.0 {
            axpy(&mut out, a, &w[i * n_out..][..n_out]);
        }
    }
    Ok(out)
}

/// Accumulates weight and bias gradients and returns the input gradient.
pub fn dense_backward(input: &[f64], layer: &DenseLayer, d_out: &[f64], grad: &mut DenseLayer) -> Vec<f64> {
    let n_out = layer.n_out();
    let w = layer.weights.data();
    axpy(&mut grad.bias, 1.0, d_out);
    let dw = grad.weights.data_mut();
    input
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if a != 0.0 {
                axpy(&mut dw[i * n_out..][..n_out], a, d_out);
            }
            dot(&w[i * n_out..][..n_out], d_out)
        })
        .collect()
}

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability clamp used by [`bce_loss`].
pub const PROB_EPS: f64 = 1e-7;

/// Binary cross-entropy of a probability against a 0/1 target.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}
