//! Classify ECG records as healthy or unhealthy from images of their phase
//! portraits.
//!
//! The stages are [`record_io`] (parsing and synthetic data), [`phase_space`]
//! (derivative embedding and Q-R chord), [`rasterizer`] (64x64 images and
//! augmentation), [`neuralnet`] (the CNN) and [`pipeline`] (dataset split,
//! training and evaluation).

pub mod neuralnet;
pub mod phase_space;
pub mod pipeline;
pub mod rasterizer;
pub mod record_io;
