//! Synthetic ECG built from Gaussian P, Q, R, S and T bumps.
//!
//! Bumps are truncated at four standard deviations so that, for a normal
//! beat, the sample at the R center carries the R amplitude exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Label, RecordError, Result, Signal};

/// One Gaussian wave: center offset from R and width in seconds at 60 bpm,
/// amplitude in mV.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bump {
    offset: f64,
    width: f64,
    amplitude: f64,
}

const TRUNCATE_SIGMAS: f64 = 4.0;

/// Fraction of the beat interval at which the R wave sits.
const R_PHASE: f64 = 0.4;

/// Shape of a single beat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeatMorphology {
    /// Sinus beat: small P, narrow QRS, upright T.
    Normal,
    /// Premature ventricular beat: no P, wide tall QRS, inverted T.
    Ectopic,
}

impl BeatMorphology {
    fn bumps(self) -> &'static [Bump] {
        const NORMAL: [Bump; 5] = [
            Bump { offset: -0.20, width: 0.025, amplitude: 0.15 },
            Bump { offset: -0.04, width: 0.008, amplitude: -0.15 },
            Bump { offset: 0.0, width: 0.010, amplitude: 1.2 },
            Bump { offset: 0.04, width: 0.008, amplitude: -0.25 },
            Bump { offset: 0.30, width: 0.040, amplitude: 0.30 },
        ];
        const ECTOPIC: [Bump; 5] = [
            Bump { offset: -0.20, width: 0.025, amplitude: 0.0 },
            Bump { offset: -0.07, width: 0.015, amplitude: -0.30 },
            Bump { offset: 0.0, width: 0.030, amplitude: 1.6 },
            Bump { offset: 0.08, width: 0.020, amplitude: -0.70 },
            Bump { offset: 0.30, width: 0.050, amplitude: -0.40 },
        ];
        match self {
            BeatMorphology::Normal => &NORMAL,
            BeatMorphology::Ectopic => &ECTOPIC,
        }
    }

    /// Peak of the R wave in mV.
    pub fn r_amplitude(self) -> f64 {
        self.bumps()[2].amplitude
    }
}

/// Rhythm description for [`synth_record`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub duration: f64,
    pub sampling_rate: f64,
    pub heart_rate: f64,
    pub noise_amp: f64,
    /// Relative beat-to-beat interval jitter, uniform in `±rr_jitter`.
    pub rr_jitter: f64,
    /// Probability that a beat is ectopic (and arrives early).
    pub ectopic_prob: f64,
    /// Relative beat-to-beat amplitude jitter.
    pub amplitude_jitter: f64,
}

impl SynthParams {
    pub fn regular(duration: f64, sampling_rate: f64, heart_rate: f64, noise_amp: f64) -> Self {
        Self {
            duration,
            sampling_rate,
            heart_rate,
            noise_amp,
            rr_jitter: 0.0,
            ectopic_prob: 0.0,
            amplitude_jitter: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RecordError::InvalidSignal(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate.is_finite()) {
            return bad(format!("sampling rate must be positive, got {}", self.sampling_rate));
        }
        if !(20.0..=240.0).contains(&self.heart_rate) {
            return bad(format!("heart rate {} outside [20, 240] bpm", self.heart_rate));
        }
        if !(self.noise_amp >= 0.0 && self.noise_amp.is_finite()) {
            return bad(format!("noise amplitude must be non-negative, got {}", self.noise_amp));
        }
        if !(0.0..0.5).contains(&self.rr_jitter) {
            return bad(format!("rr_jitter {} outside [0, 0.5)", self.rr_jitter));
        }
        if !(0.0..=1.0).contains(&self.ectopic_prob) {
            return bad(format!("ectopic_prob {} outside [0, 1]", self.ectopic_prob));
        }
        if !(0.0..1.0).contains(&self.amplitude_jitter) {
            return bad(format!("amplitude_jitter {} outside [0, 1)", self.amplitude_jitter));
        }
        Ok(())
    }
}

struct Beat {
    /// R center in fractional samples.
    r_pos: f64,
    morphology: BeatMorphology,
    gain: f64,
}

/// Noiseless-periodic ECG at a fixed heart rate plus uniform noise in
/// `±noise_amp`.
///
/// With zero noise and an integer number of samples per beat the output is
/// exactly periodic, and the R centers fall at
/// `0.4 * period + k * period` samples.
pub fn synth_ecg(
    duration: f64,
    sampling_rate: f64,
    heart_rate: f64,
    noise_amp: f64,
    seed: u64,
) -> Result<Signal> {
    synth_record(
        "synth",
        &SynthParams::regular(duration, sampling_rate, heart_rate, noise_amp),
        seed,
    )
}

/// General generator with optional rhythm irregularity and ectopic beats.
pub fn synth_record(record_id: &str, params: &SynthParams, seed: u64) -> Result<Signal> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = params.sampling_rate;
    let n = (params.duration * fs).round().max(1.0) as usize;
    let period = fs * 60.0 / params.heart_rate;
    // Wave offsets and widths are given at 60 bpm and shrink for faster rates.
    let time_scale = (60.0 / params.heart_rate).min(1.0);

    let mut beats = Vec::new();
    let mut r_pos = R_PHASE * period - period;
    while r_pos < n as f64 + period {
        let ectopic = params.ectopic_prob > 0.0 && rng.gen::<f64>() < params.ectopic_prob;
        let jitter = if params.rr_jitter > 0.0 {
            rng.gen_range(-params.rr_jitter..=params.rr_jitter)
        } else {
            0.0
        };
        let gain = if params.amplitude_jitter > 0.0 {
            1.0 + rng.gen_range(-params.amplitude_jitter..=params.amplitude_jitter)
        } else {
            1.0
        };
        beats.push(Beat {
            r_pos,
            morphology: if ectopic {
                BeatMorphology::Ectopic
            } else {
                BeatMorphology::Normal
            },
            gain,
        });
        // Ectopic beats arrive early and are followed by a compensatory pause.
        let interval = if ectopic { 0.7 } else { 1.0 } * (1.0 + jitter);
        r_pos += period * interval;
        if ectopic {
            r_pos += period * 0.3;
        }
    }

    let mut samples = vec![0.0; n];
    for beat in &beats {
        for bump in beat.morphology.bumps() {
            if bump.amplitude == 0.0 {
                continue;
            }
            // Offsets are taken relative to the R position first so that
            // beats an integer number of samples apart produce identical values.
            let rel_center = bump.offset * time_scale * fs;
            let sigma = bump.width * time_scale * fs;
            let reach = TRUNCATE_SIGMAS * sigma;
            let lo = (beat.r_pos + rel_center - reach).ceil().max(0.0);
            let hi = (beat.r_pos + rel_center + reach).floor().min(n as f64 - 1.0);
            if hi < lo {
                continue;
            }
            let amplitude = bump.amplitude * beat.gain;
            for (i, s) in samples.iter_mut().enumerate().take(hi as usize + 1).skip(lo as usize) {
                let z = ((i as f64 - beat.r_pos) - rel_center) / sigma;
                if z.abs() > TRUNCATE_SIGMAS {
                    continue;
                }
                *s += amplitude * (-0.5 * z * z).exp();
            }
        }
    }

    if params.noise_amp > 0.0 {
        for s in &mut samples {
            *s += rng.gen_range(-params.noise_amp..=params.noise_amp);
        }
    }

    Signal::new(record_id, "MLII", fs, samples)
}

/// Rhythm parameters for a synthetic stand-in of a labeled record.
///
/// Healthy records get a regular sinus rhythm; unhealthy ones get jittered
/// intervals and a share of ectopic beats. The per-record heart rate and
/// irregularity are drawn from `seed`.
pub fn corpus_params(label: Label, duration: f64, sampling_rate: f64, seed: u64) -> SynthParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_C0A9);
    let heart_rate = rng.gen_range(58.0..=82.0);
    match label {
        Label::Healthy => SynthParams {
            duration,
            sampling_rate,
            heart_rate,
            noise_amp: 0.02,
            rr_jitter: 0.03,
            ectopic_prob: 0.0,
            amplitude_jitter: 0.03,
        },
        Label::Unhealthy => SynthParams {
            duration,
            sampling_rate,
            heart_rate,
            noise_amp: 0.02,
            rr_jitter: rng.gen_range(0.12..=0.25),
            ectopic_prob: rng.gen_range(0.15..=0.35),
            amplitude_jitter: 0.08,
        },
    }
}
