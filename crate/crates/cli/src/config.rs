use std::path::{Path, PathBuf};

use ecg_phase::neuralnet::ModelConfig;
use ecg_phase::phase_space::{DerivativeScheme, DEFAULT_Q_WINDOW_MS};
use ecg_phase::pipeline::{DatasetSplit, RenderConfig, TrainConfig};
use ecg_phase::rasterizer::{AugmentParams, RenderStyle};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Every knob of a run. Missing keys in a config file take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// WFDB records (`.hea` + `.dat`) and/or CSV signals.
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub channel: String,
    /// Sampling rate for single-column CSV inputs.
    pub csv_sampling_rate: Option<f64>,
    /// Generate the corpus instead of reading `data_dir`.
    pub synth: bool,
    pub synth_duration_s: f64,
    pub synth_sampling_rate: f64,
    pub derivative_scheme: DerivativeScheme,
    pub q_window_ms: f64,
    pub margin: f64,
    pub draw_chord: bool,
    pub style: RenderStyle,
    pub augment: AugmentParams,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub model: ModelConfig,
    pub split: DatasetSplit,
}

impl Default for RunConfig {
    fn default() -> Self {
        let render = RenderConfig::default();
        let train = TrainConfig::default();
        Self {
            data_dir: PathBuf::from("data"),
            output_dir: PathBuf::from("out"),
            channel: "MLII".into(),
            csv_sampling_rate: None,
            synth: false,
            synth_duration_s: 10.0,
            synth_sampling_rate: 360.0,
            derivative_scheme: DerivativeScheme::default(),
            q_window_ms: DEFAULT_Q_WINDOW_MS,
            margin: render.margin,
            draw_chord: render.draw_chord,
            style: render.style,
            augment: train.augment,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            batch_size: train.batch_size,
            seed: train.seed,
            model: train.model,
            split: DatasetSplit::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn render(&self) -> RenderConfig {
        RenderConfig {
            derivative_scheme: self.derivative_scheme,
            q_window_ms: self.q_window_ms,
            margin: self.margin,
            draw_chord: self.draw_chord,
            style: self.style,
        }
    }

    pub fn train(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            augment: self.augment,
            seed: self.seed,
            model: self.model,
        }
    }

    /// The configuration as recorded in reports: everything except the
    /// output location, so runs written to different directories compare equal.
    pub fn snapshot(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        value.as_object_mut().expect("object").remove("output_dir");
        value
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
