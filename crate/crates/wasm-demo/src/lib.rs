//! wasm-bindgen bindings for the static page in `www/`.
//!
//! The page synthesizes an ECG strip, shows its phase portrait with the Q-R
//! chord, and previews the random zoom/shear/flip used during training. All
//! logic lives in plain functions so it can be tested natively; the exported
//! wrappers only translate errors.

use ecg_phase::phase_space::{derivative_of, embed, record_chord, DerivativeScheme, DEFAULT_Q_WINDOW_MS};
use ecg_phase::pipeline::{render_signal, RenderConfig};
use ecg_phase::rasterizer::{apply_transform, sample_transform, AugmentParams, ImageRGB, Transform};
use ecg_phase::record_io::{synth_record, Signal, SynthParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

const SAMPLING_RATE: f64 = 360.0;
const DURATION_S: f64 = 8.0;

fn scheme(third_order: bool) -> DerivativeScheme {
    if third_order {
        DerivativeScheme::ThirdOrderForward
    } else {
        DerivativeScheme::FirstOrderForward
    }
}

pub fn synth_strip(heart_rate: f64, noise: f64, irregularity: f64, seed: u32) -> Result<Signal, String> {
    let irregularity = irregularity.clamp(0.0, 1.0);
    let params = SynthParams {
        duration: DURATION_S,
        sampling_rate: SAMPLING_RATE,
        heart_rate,
        noise_amp: noise,
        rr_jitter: 0.25 * irregularity,
        ectopic_prob: 0.35 * irregularity,
        amplitude_jitter: 0.03 + 0.05 * irregularity,
    };
    synth_record("demo", &params, u64::from(seed)).map_err(|e| e.to_string())
}

/// 64×64 RGBA phase portrait of a synthetic strip.
pub fn portrait(signal: &Signal, third_order: bool) -> Result<ImageRGB, String> {
    let config = RenderConfig {
        derivative_scheme: scheme(third_order),
        ..RenderConfig::default()
    };
    render_signal(signal, &config).map_err(|e| e.to_string())
}

/// Interleaved `v, dv` pairs followed by the chord as `qv, qdv, rv, rdv`.
pub fn trajectory_points(signal: &Signal, third_order: bool) -> Result<Vec<f64>, String> {
    let trajectory = embed(signal, scheme(third_order)).map_err(|e| e.to_string())?;
    let chord = record_chord(signal, &trajectory, DEFAULT_Q_WINDOW_MS).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = trajectory.points.iter().flat_map(|p| [p.v, p.dv]).collect();
    out.extend([chord.q_point.v, chord.q_point.dv, chord.r_point.v, chord.r_point.dv]);
    Ok(out)
}

/// `count` augmented copies drawn from a seeded stream, as in training.
pub fn augmentations(image: &ImageRGB, zoom_range: f64, shear_range: f64, flip: bool, count: usize, seed: u32) -> Result<Vec<(Transform, ImageRGB)>, String> {
    let params = AugmentParams {
        zoom_range,
        shear_range,
        horizontal_flip: flip,
    };
    params.validate().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
    Ok((0..count)
        .map(|_| {
            let t = sample_transform(&params, &mut rng);
            (t, apply_transform(image, &t))
        })
        .collect())
}

/// Max error of both derivative schemes on `sin` at step `h`: `[first, third]`.
pub fn scheme_errors(h: f64) -> Result<[f64; 2], String> {
    if !(h > 0.0 && h < 1.0) {
        return Err(format!("step must lie in (0, 1), got {h}"));
    }
    let n = (std::f64::consts::TAU / h).ceil() as usize + 4;
    let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
    let err = |s: DerivativeScheme| -> Result<f64, String> {
        let d = derivative_of(&f, h, s).map_err(|e| e.to_string())?;
        Ok(d.iter()
            .enumerate()
            .map(|(i, x)| (x - (i as f64 * h).cos()).abs())
            .fold(0.0, f64::max))
    };
    Ok([err(DerivativeScheme::FirstOrderForward)?, err(DerivativeScheme::ThirdOrderForward)?])
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub struct Strip {
    signal: Signal,
}

#[wasm_bindgen]
impl Strip {
    #[wasm_bindgen(constructor)]
    pub fn new(heart_rate: f64, noise: f64, irregularity: f64, seed: u32) -> Result<Strip, JsError> {
        synth_strip(heart_rate, noise, irregularity, seed).map(|signal| Strip { signal }).map_err(js)
    }

    pub fn samples(&self) -> Vec<f64> {
        self.signal.samples.clone()
    }

    #[wasm_bindgen(js_name = portraitRgba)]
    pub fn portrait_rgba(&self, third_order: bool) -> Result<Vec<u8>, JsError> {
        portrait(&self.signal, third_order).map(|img| img.to_rgba()).map_err(js)
    }

    pub fn trajectory(&self, third_order: bool) -> Result<Vec<f64>, JsError> {
        trajectory_points(&self.signal, third_order).map_err(js)
    }

    /// `count` augmented portraits, concatenated RGBA buffers.
    #[wasm_bindgen(js_name = augmentedRgba)]
    pub fn augmented_rgba(&self, zoom_range: f64, shear_range: f64, flip: bool, count: usize, seed: u32) -> Result<Vec<u8>, JsError> {
        let image = portrait(&self.signal, true).map_err(js)?;
        let out = augmentations(&image, zoom_range, shear_range, flip, count, seed).map_err(js)?;
        Ok(out.iter().flat_map(|(_, img)| img.to_rgba()).collect())
    }
}

#[wasm_bindgen(js_name = schemeErrors)]
pub fn scheme_errors_js(h: f64) -> Result<Vec<f64>, JsError> {
    scheme_errors(h).map(|e| e.to_vec()).map_err(js)
}
