//! Ingestion of ambulatory ECG records.
//!
//! Records come as a text header plus a format-212 packed signal file, or as
//! plain CSV. Everything downstream works on [`Signal`] values in millivolts.

mod csv_signal;
mod format212;
mod header;
mod labels;
mod synth;

pub use csv_signal::{load_csv, parse_csv, write_csv};
pub use format212::{decode_format212, encode_format212};
pub use header::{parse_header, ChannelSpec, RecordHeader, SUPPORTED_FORMATS};
pub use labels::{load_labels, Label, LabelTable, EXCLUDED_RECORDS};
pub use synth::{corpus_params, synth_ecg, synth_record, BeatMorphology, SynthParams};

use std::fs;
use std::path::Path;

/// Errors raised while reading or generating records.
#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported signal format {0} (only 212 is supported)")]
    UnsupportedFormat(u32),
    #[error("signal data truncated: need {needed} bytes, got {got}")]
    TruncatedData { needed: usize, got: usize },
    #[error("sample {0} outside the 12-bit signed range")]
    OutOfRange(i32),
    #[error("channel {0:?} not present in record")]
    ChannelAbsent(String),
    #[error("non-uniform sampling at row {row}")]
    NonUniformSampling { row: usize },
    #[error("malformed CSV row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = RecordError> = std::result::Result<T, E>;

/// A uniformly sampled voltage series in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub record_id: String,
    pub channel: String,
    pub sampling_rate: f64,
    pub samples: Vec<f64>,
}

impl Signal {
    /// Builds a signal, rejecting empty or non-finite data.
    pub fn new(
        record_id: impl Into<String>,
        channel: impl Into<String>,
        sampling_rate: f64,
        samples: Vec<f64>,
    ) -> Result<Self> {
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(RecordError::InvalidSignal(format!(
                "sampling rate must be positive, got {sampling_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(RecordError::InvalidSignal("no samples".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(RecordError::InvalidSignal(format!(
                "sample {i} is not finite"
            )));
        }
        Ok(Self {
            record_id: record_id.into(),
            channel: channel.into(),
            sampling_rate,
            samples,
        })
    }

    /// Sampling step in seconds.
    pub fn step(&self) -> f64 {
        1.0 / self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Returns a copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Converts a raw ADU value to millivolts.
pub fn to_millivolts(adu: i32, gain: f64, baseline: i32) -> f64 {
    debug_assert!(gain > 0.0);
    f64::from(adu - baseline) / gain
}

/// Extracts the named channel from a decoded ADU matrix (one row per frame).
pub fn select_channel(header: &RecordHeader, raw: &[Vec<i32>], name: &str) -> Result<Signal> {
    let (index, spec) = header
        .channels
        .iter()
        .enumerate()
        .find(|(_, c)| c.name == name)
        .ok_or_else(|| RecordError::ChannelAbsent(name.to_string()))?;
    let samples = raw
        .iter()
        .map(|frame| {
            frame
                .get(index)
                .map(|&adu| to_millivolts(adu, spec.gain, spec.baseline))
                .ok_or_else(|| {
                    RecordError::InvalidSignal(format!(
                        "frame has {} channels, expected {}",
                        frame.len(),
                        header.n_channels
                    ))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Signal::new(&header.record_id, name, header.sampling_rate, samples)
}

/// Reads `<dir>/<record>.hea` and the signal file it names, returning the
/// requested channel in millivolts.
pub fn load_record(dir: &Path, record_id: &str, channel: &str) -> Result<Signal> {
    let hea_path = dir.join(format!("{record_id}.hea"));
    let text = fs::read_to_string(&hea_path).map_err(|source| RecordError::Io {
        path: hea_path.display().to_string(),
        source,
    })?;
    let header = parse_header(&text)?;
    // Check the channel before touching the (large) signal file.
    if !header.channels.iter().any(|c| c.name == channel) {
        return Err(RecordError::ChannelAbsent(channel.to_string()));
    }
    let file_name = &header.channels[0].file_name;
    if header.channels.iter().any(|c| &c.file_name != file_name) {
        return Err(RecordError::MalformedHeader(
            "channels stored in separate files are not supported".into(),
        ));
    }
    let dat_path = dir.join(file_name);
    let bytes = fs::read(&dat_path).map_err(|source| RecordError::Io {
        path: dat_path.display().to_string(),
        source,
    })?;
    let raw = decode_format212(&bytes, header.n_samples, header.n_channels)?;
    select_channel(&header, &raw, channel)
}
