//! A small convolutional network written out by hand: forward pass,
//! backpropagation and gradient-descent updates.

mod checkpoint;
mod layers;
mod model;
mod tensor;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use layers::{
    bce_loss, conv2d_backward, conv2d_forward, dense_backward, dense_forward, flatten, maxpool_backward,
    maxpool_forward, relu, relu_backward, sigmoid, ConvLayer, DenseLayer, PROB_EPS,
};
pub use model::{
    backward, backward_into, forward, init_weights, predict, sgd_step, ForwardCache, Gradients, Model, ModelConfig,
};
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("pooling needs even spatial dimensions, got {h}x{w}")]
    OddDimension { h: usize, w: usize },
    #[error("missing forward cache: {0}")]
    MissingCache(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
}
