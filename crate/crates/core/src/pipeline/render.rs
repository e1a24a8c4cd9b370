use serde::{Deserialize, Serialize};

use crate::phase_space::{embed, record_chord, DerivativeScheme, PhaseSpaceError, DEFAULT_Q_WINDOW_MS};
use crate::rasterizer::{fit_viewport, rasterize_with, ImageRGB, RasterError, RenderStyle};
use crate::record_io::{corpus_params, synth_record, LabelTable, RecordError, Signal};

use super::{derive_seed, Stream};

/// Everything that turns a signal into its phase-space image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub derivative_scheme: DerivativeScheme,
    pub q_window_ms: f64,
    /// Fraction of the data extent added on each side of the viewport.
    pub margin: f64,
    pub draw_chord: bool,
    pub style: RenderStyle,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            derivative_scheme: DerivativeScheme::default(),
            q_window_ms: DEFAULT_Q_WINDOW_MS,
            margin: 0.05,
            draw_chord: true,
            style: RenderStyle::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Embeds `signal`, locates its Q-R chord and draws both.
pub fn render_signal(signal: &Signal, config: &RenderConfig) -> Result<ImageRGB, RenderError> {
    let trajectory = embed(signal, config.derivative_scheme)?;
    let chord = if config.draw_chord {
        Some(record_chord(signal, &trajectory, config.q_window_ms)?)
    } else {
        None
    };
    let viewport = fit_viewport(&trajectory, chord.as_ref(), config.margin)?;
    Ok(rasterize_with(&trajectory, chord.as_ref(), &viewport, &config.style))
}

/// One synthetic signal per labeled record, named after the record.
///
/// Healthy records get a regular rhythm and unhealthy ones an irregular rhythm
/// with ectopic beats. Each record draws from its own seed so the corpus does
/// not depend on iteration order.
pub fn synth_corpus(
    labels: &LabelTable,
    duration: f64,
    sampling_rate: f64,
    seed: u64,
) -> Result<Vec<Signal>, RecordError> {
    let base = derive_seed(seed, Stream::Synth);
    labels
        .iter()
        .enumerate()
        .map(|(i, (id, label))| {
            let record_seed = base.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let params = corpus_params(label, duration, sampling_rate, record_seed);
            synth_record(id, &params, record_seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_io::{load_labels, synth_ecg};

    #[test]
    fn renders_a_clean_beat_train() {
        let signal = synth_ecg(5.0, 360.0, 72.0, 0.0, 1).unwrap();
        let image = render_signal(&signal, &RenderConfig::default()).unwrap();
        let ink = image.count([0, 0, 0]);
        assert!(ink > 64 && ink < 64 * 64 / 2, "{ink} dark pixels");
        assert_eq!(image, render_signal(&signal, &RenderConfig::default()).unwrap());
    }

    #[test]
    fn too_short_for_the_stencil() {
        let signal = Signal::new("x", "MLII", 360.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            render_signal(&signal, &RenderConfig::default()),
            Err(RenderError::PhaseSpace(PhaseSpaceError::TooShort { .. }))
        ));
    }

    #[test]
    fn corpus_covers_every_label() {
        let labels = load_labels();
        let corpus = synth_corpus(&labels, 4.0, 360.0, 0).unwrap();
        assert_eq!(corpus.len(), 44);
        assert!(corpus.iter().all(|s| labels.get(&s.record_id).is_some() && s.len() == 1440));
        let again = synth_corpus(&labels, 4.0, 360.0, 0).unwrap();
        assert_eq!(corpus, again);
        assert_ne!(corpus, synth_corpus(&labels, 4.0, 360.0, 1).unwrap());
    }
}
