use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, maxpool_backward, maxpool_forward, relu,
    relu_backward, sigmoid, ConvLayer, DenseLayer,
};
use super::{NnError, Tensor};

/// Architecture of the two-convolution binary classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Input height, width, channels.
    pub input: [usize; 3],
    pub kernel_size: usize,
    pub conv1_filters: usize,
    pub conv2_filters: usize,
    pub hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input: [64, 64, 3],
            kernel_size: 3,
            conv1_filters: 32,
            conv2_filters: 64,
            hidden: 128,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), NnError> {
        let [h, w, c] = self.input;
        if h % 4 != 0 || w % 4 != 0 || h == 0 || w == 0 || c == 0 {
            return Err(NnError::ShapeMismatch(format!(
                "input {:?} must have non-zero channels and spatial dims divisible by 4",
                self.input
            )));
        }
        if self.kernel_size.is_multiple_of(2) {
            return Err(NnError::ShapeMismatch(format!("kernel size {} must be odd", self.kernel_size)));
        }
        if self.conv1_filters == 0 || self.conv2_filters == 0 || self.hidden == 0 {
            return Err(NnError::ShapeMismatch("layer widths must be positive".into()));
        }
        Ok(())
    }

    /// Length of the flattened feature vector after the second pooling.
    pub fn flat_len(&self) -> usize {
        (self.input[0] / 4) * (self.input[1] / 4) * self.conv2_filters
    }

    /// Shapes of every activation from the input to the output.
    pub fn shape_chain(&self) -> Vec<Vec<usize>> {
        let [h, w, c] = self.input;
        vec![
            vec![h, w, c],
            vec![h, w, self.conv1_filters],
            vec![h / 2, w / 2, self.conv1_filters],
            vec![h / 2, w / 2, self.conv2_filters],
            vec![h / 4, w / 4, self.conv2_filters],
            vec![self.flat_len()],
            vec![self.hidden],
            vec![1],
        ]
    }
}

/// conv -> relu -> pool -> conv -> relu -> pool -> flatten -> dense -> relu
/// -> dense -> sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub config: ModelConfig,
    pub conv1: ConvLayer,
    pub conv2: ConvLayer,
    pub dense1: DenseLayer,
    pub dense_out: DenseLayer,
}

/// Per-parameter gradients, laid out exactly like the model.
pub type Gradients = Model;

impl Model {
    pub fn zeros(config: ModelConfig) -> Self {
        let k = config.kernel_size;
        Self {
            config,
            conv1: ConvLayer::zeros(k, config.input[2], config.conv1_filters),
            conv2: ConvLayer::zeros(k, config.conv1_filters, config.conv2_filters),
            dense1: DenseLayer::zeros(config.flat_len(), config.hidden),
            dense_out: DenseLayer::zeros(config.hidden, 1),
        }
    }

    /// Parameter slices in a fixed order: each layer's weights then bias.
    pub fn params(&self) -> [&[f64]; 8] {
        [
            self.conv1.kernels.data(),
            &self.conv1.bias,
            self.conv2.kernels.data(),
            &self.conv2.bias,
            self.dense1.weights.data(),
            &self.dense1.bias,
            self.dense_out.weights.data(),
            &self.dense_out.bias,
        ]
    }

    pub fn params_mut(&mut self) -> [&mut [f64]; 8] {
        [
            self.conv1.kernels.data_mut(),
            &mut self.conv1.bias,
            self.conv2.kernels.data_mut(),
            &mut self.conv2.bias,
            self.dense1.weights.data_mut(),
            &mut self.dense1.bias,
            self.dense_out.weights.data_mut(),
            &mut self.dense_out.bias,
        ]
    }

    pub fn param_shapes(&self) -> [Vec<usize>; 8] {
        [
            self.conv1.kernels.shape().to_vec(),
            vec![self.conv1.bias.len()],
            self.conv2.kernels.shape().to_vec(),
            vec![self.conv2.bias.len()],
            self.dense1.weights.shape().to_vec(),
            vec![self.dense1.bias.len()],
            self.dense_out.weights.shape().to_vec(),
            vec![self.dense_out.bias.len()],
        ]
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Multiplies every value by `factor` (used to average batch gradients).
    pub fn scale(&mut self, factor: f64) {
        for p in self.params_mut() {
            p.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.iter().all(|v| v.is_finite()))
    }
}

/// Glorot-uniform weights (bound `sqrt(6 / (fan_in + fan_out))`), zero
/// biases. Convolution fans count the receptive field.
pub fn init_weights(config: ModelConfig, seed: u64) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = Model::zeros(config);
    let k2 = config.kernel_size * config.kernel_size;
    let fans = [
        (k2 * config.input[2], k2 * config.conv1_filters),
        (k2 * config.conv1_filters, k2 * config.conv2_filters),
        (config.flat_len(), config.hidden),
        (config.hidden, 1),
    ];
    let [c1, _, c2, _, d1, _, d2, _] = model.params_mut();
    for (weights, (fan_in, fan_out)) in [c1, c2, d1, d2].into_iter().zip(fans) {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        for w in weights.iter_mut() {
            *w = rng.gen_range(-bound..=bound);
        }
    }
    model
}

/// Intermediate values kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Tensor,
    pub conv1: Tensor,
    pub act1: Tensor,
    pub pool1: Tensor,
    pub pool1_arg: Vec<usize>,
    pub conv2: Tensor,
    pub act2: Tensor,
    pub pool2_arg: Vec<usize>,
    pub flat: Vec<f64>,
    pub hidden_pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logit: f64,
    pub probability: f64,
}

impl ForwardCache {
    /// Shapes of every activation, for checking against
    /// [`ModelConfig::shape_chain`].
    pub fn shape_chain(&self) -> Vec<Vec<usize>> {
        let p2 = self.conv2.shape();
        vec![
            self.input.shape().to_vec(),
            self.conv1.shape().to_vec(),
            self.pool1.shape().to_vec(),
            self.conv2.shape().to_vec(),
            vec![p2[0] / 2, p2[1] / 2, p2[2]],
            vec![self.flat.len()],
            vec![self.hidden.len()],
            vec![1],
        ]
    }
}

/// Runs the network on one `H x W x C` image with values in [0, 1].
pub fn forward(model: &Model, image: &Tensor) -> Result<ForwardCache, NnError> {
    if image.shape() != model.config.input {
        return Err(NnError::ShapeMismatch(format!(
            "model expects input {:?}, got {:?}",
            model.config.input,
            image.shape()
        )));
    }
    let conv1 = conv2d_forward(image, &model.conv1)?;
    let act1 = relu(&conv1);
    let (pool1, pool1_arg) = maxpool_forward(&act1)?;
    let conv2 = conv2d_forward(&pool1, &model.conv2)?;
    let act2 = relu(&conv2);
    let (pool2, pool2_arg) = maxpool_forward(&act2)?;
    let flat = pool2.into_data();
    let hidden_pre = dense_forward(&flat, &model.dense1)?;
    let hidden: Vec<f64> = hidden_pre.iter().map(|v| v.max(0.0)).collect();
    let logit = dense_forward(&hidden, &model.dense_out)?[0];
    Ok(ForwardCache {
        input: image.clone(),
        conv1,
        act1,
        pool1,
        pool1_arg,
        conv2,
        act2,
        pool2_arg,
        flat,
        hidden_pre,
        hidden,
        logit,
        probability: sigmoid(logit),
    })
}

/// Probability only.
pub fn predict(model: &Model, image: &Tensor) -> Result<f64, NnError> {
    forward(model, image).map(|c| c.probability)
}

/// Gradients of the binary cross-entropy for target `y` with respect to every
/// parameter, added into `grads`. Sigmoid and loss are differentiated
/// together, giving `p - y` at the logit.
pub fn backward_into(model: &Model, cache: &ForwardCache, y: f64, grads: &mut Gradients) -> Result<(), NnError> {
    if grads.config != model.config {
        return Err(NnError::ShapeMismatch("gradient buffer built for another architecture".into()));
    }
    if cache.shape_chain() != model.config.shape_chain() {
        return Err(NnError::MissingCache(
            "cache does not belong to a forward pass of this model".into(),
        ));
    }
    let d_logit = cache.probability - y;
    let d_hidden = dense_backward(&cache.hidden, &model.dense_out, &[d_logit], &mut grads.dense_out);
    let d_hidden_pre: Vec<f64> = cache
        .hidden_pre
        .iter()
        .zip(&d_hidden)
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    let d_flat = dense_backward(&cache.flat, &model.dense1, &d_hidden_pre, &mut grads.dense1);

    let c = model.config;
    let pool2_shape = [c.input[0] / 4, c.input[1] / 4, c.conv2_filters];
    let d_pool2 = Tensor::from_vec(pool2_shape.to_vec(), d_flat);
    let d_act2 = maxpool_backward(cache.act2.shape(), &cache.pool2_arg, &d_pool2);
    let d_conv2 = relu_backward(&cache.conv2, &d_act2);
    let d_pool1 = conv2d_backward(&cache.pool1, &model.conv2, &d_conv2, &mut grads.conv2, true)?
        .expect("input gradient requested");
    let d_act1 = maxpool_backward(cache.act1.shape(), &cache.pool1_arg, &d_pool1);
    let d_conv1 = relu_backward(&cache.conv1, &d_act1);
    conv2d_backward(&cache.input, &model.conv1, &d_conv1, &mut grads.conv1, false)?;
    Ok(())
}

pub fn backward(model: &Model, cache: &ForwardCache, y: f64) -> Result<Gradients, NnError> {
    let mut grads = Model::zeros(model.config);
    backward_into(model, cache, y, &mut grads)?;
    Ok(grads)
}

/// Plain gradient descent: `w <- w - alpha * dL/dw` for every parameter.
pub fn sgd_step(model: &mut Model, grads: &Gradients, alpha: f64) {
    debug_assert!(alpha > 0.0);
    for (w, g) in model.params_mut().into_iter().zip(grads.params()) {
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi -= alpha * gi;
        }
    }
}
