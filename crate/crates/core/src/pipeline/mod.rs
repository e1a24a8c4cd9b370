//! Dataset assembly, training loop and evaluation.

mod curves;
mod render;
mod report;
mod split;
mod train;

pub use curves::{emit_curves, read_curves, write_curves};
pub use render::{render_signal, synth_corpus, RenderConfig, RenderError};
pub use report::{
    accuracy, evaluate, evaluate_split, predict_set, Confusion, RecordPrediction, Role, RunReport, Summary,
};
pub use split::{build_dataset, DatasetSplit, Example};
pub use train::{derive_seed, loss_and_accuracy, train, EpochMetrics, Stream, TrainConfig};

use crate::neuralnet::NnError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("no image for record {0}")]
    MissingImage(String),
    #[error("record {0} has no label")]
    LabelMismatch(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("evaluation set is empty")]
    EmptySet,
    #[error("no predictions to score")]
    EmptyInput,
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("parameters became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("malformed metrics CSV: {0}")]
    MalformedCurves(String),
    #[error(transparent)]
    Network(#[from] NnError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;
