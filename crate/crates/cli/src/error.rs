use std::path::PathBuf;

use ecg_phase::neuralnet::NnError;
use ecg_phase::pipeline::PipelineError;
use ecg_phase::rasterizer::RasterError;
use ecg_phase::record_io::RecordError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("no records found in {}", .0.display())]
    NoRecords(PathBuf),
    #[error("record {record_id}: {source}")]
    Record {
        record_id: String,
        #[source]
        source: RecordError,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: RasterError,
    },
    #[error("{}: {source}", path.display())]
    Checkpoint {
        path: PathBuf,
        #[source]
        source: NnError,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for usage errors, 2 for bad or missing input data, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NoRecords(_)
            | CliError::Record { .. }
            | CliError::Image { .. }
            | CliError::Checkpoint { .. }
            | CliError::Read { .. } => 2,
            CliError::Pipeline(e) => match e {
                PipelineError::InvalidConfig(_) | PipelineError::InvalidSplit(_) => 1,
                PipelineError::MissingImage(_)
                | PipelineError::LabelMismatch(_)
                | PipelineError::EmptyTrainSet
                | PipelineError::EmptySet
                | PipelineError::EmptyInput => 2,
                _ => 3,
            },
            CliError::Write { .. } => 3,
        }
    }
}
