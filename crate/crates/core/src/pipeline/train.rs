use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::neuralnet::{backward_into, bce_loss, forward, sgd_step, Model, ModelConfig};
use crate::pipeline::split::Example;
use crate::rasterizer::{augment, AugmentParams};
use crate::record_io::Label;

/// Hyperparameters of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub augment: AugmentParams,
    pub seed: u64,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 175,
            learning_rate: 0.01,
            batch_size: 8,
            augment: AugmentParams::default(),
            seed: 0,
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(PipelineError::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(PipelineError::InvalidConfig("batch size must be positive".into()));
        }
        self.augment
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        self.model
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

/// Independent random streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    Shuffle,
    Augment,
    Synth,
}

/// Seed for one purpose-specific stream (SplitMix64 finalizer over the
/// master seed and a per-stream constant).
pub fn derive_seed(seed: u64, stream: Stream) -> u64 {
    let salt: u64 = match stream {
        Stream::Init => 0x1A2B_3C4D_5E6F_7081,
        Stream::Shuffle => 0x9E37_79B9_7F4A_7C15,
        Stream::Augment => 0xD1B5_4A32_D192_ED03,
        Stream::Synth => 0x8CB9_2BA7_2F3D_8DD7,
    };
    let mut z = seed ^ salt;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Loss and accuracy after one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    /// `None` when there is no test set.
    pub test_loss: Option<f64>,
    pub test_accuracy: Option<f64>,
}

/// Mean loss and accuracy of `model` on clean images.
pub fn loss_and_accuracy(model: &Model, set: &[Example]) -> Result<(f64, f64)> {
    if set.is_empty() {
        return Err(PipelineError::EmptySet);
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for ex in set {
        let p = forward(model, &ex.image.to_tensor())?.probability;
        loss += bce_loss(p, ex.label.target());
        correct += usize::from(Label::from_probability(p) == ex.label);
    }
    Ok((loss / set.len() as f64, correct as f64 / set.len() as f64))
}

/// Mini-batch gradient descent.
///
/// Each epoch shuffles the training set, augments every training image with a
/// fresh random transform, averages gradients over each batch and applies one
/// update per batch. Training metrics are accumulated on the augmented images
/// as they pass through (before their batch's update); test metrics are
/// computed on the clean test images after the epoch.
pub fn train(
    mut model: Model,
    train_set: &[Example],
    test_set: &[Example],
    config: &TrainConfig,
) -> Result<(Model, Vec<EpochMetrics>)> {
    config.validate()?;
    if config.epochs == 0 {
        return Ok((model, Vec::new()));
    }
    if train_set.is_empty() {
        return Err(PipelineError::EmptyTrainSet);
    }
    if model.config != config.model {
        return Err(PipelineError::InvalidConfig(
            "model architecture differs from the training configuration".into(),
        ));
    }

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, Stream::Shuffle));
    let mut augment_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, Stream::Augment));
    let mut grads = Model::zeros(model.config);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            grads.scale(0.0);
            for &i in batch {
                let ex = &train_set[i];
                let image = augment(&ex.image, &config.augment, &mut augment_rng);
                let cache = forward(&model, &image.to_tensor())?;
                let y = ex.label.target();
                loss_sum += bce_loss(cache.probability, y);
                correct += usize::from(Label::from_probability(cache.probability) == ex.label);
                backward_into(&model, &cache, y, &mut grads)?;
            }
            grads.scale(1.0 / batch.len() as f64);
            sgd_step(&mut model, &grads, config.learning_rate);
        }
        if !model.is_finite() {
            return Err(PipelineError::Diverged { epoch });
        }
        let (test_loss, test_accuracy) = if test_set.is_empty() {
            (None, None)
        } else {
            let (l, a) = loss_and_accuracy(&model, test_set)?;
            (Some(l), Some(a))
        };
        history.push(EpochMetrics {
            epoch: epoch + 1,
            train_loss: loss_sum / train_set.len() as f64,
            train_accuracy: correct as f64 / train_set.len() as f64,
            test_loss,
            test_accuracy,
        });
    }
    Ok((model, history))
}
