//! Derivative embedding of a signal into the (v, dv/dt) plane, plus the
//! Q-to-R chord drawn over it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::record_io::Signal;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PhaseSpaceError {
    #[error("signal has {len} samples, scheme needs at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("chord index {index} out of range for trajectory of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("Q index {q} must precede R index {r}")]
    ChordOrder { q: usize, r: usize },
}

/// Forward-difference scheme for dv/dt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    /// `(f[i+1] - f[i]) / h`, first-order accurate.
    FirstOrderForward,
    /// `(-11 f[i] + 18 f[i+1] - 9 f[i+2] + 2 f[i+3]) / 6h`, third-order accurate.
    #[default]
    ThirdOrderForward,
}

impl DerivativeScheme {
    /// Extra samples past `i` the stencil reads.
    pub fn reach(self) -> usize {
        match self {
            DerivativeScheme::FirstOrderForward => 1,
            DerivativeScheme::ThirdOrderForward => 3,
        }
    }

    pub fn min_samples(self) -> usize {
        self.reach() + 1
    }

    /// Number of derivative values for a signal of length `n`.
    pub fn output_len(self, n: usize) -> usize {
        n.saturating_sub(self.reach())
    }
}

/// Forward-difference derivative in mV/s with step `h = 1 / sampling_rate`.
pub fn derivative(signal: &Signal, scheme: DerivativeScheme) -> Result<Vec<f64>, PhaseSpaceError> {
    derivative_of(&signal.samples, signal.step(), scheme)
}

/// Same as [`derivative`] on a bare sample slice with step `h`.
pub fn derivative_of(f: &[f64], h: f64, scheme: DerivativeScheme) -> Result<Vec<f64>, PhaseSpaceError> {
    if f.len() < scheme.min_samples() {
        return Err(PhaseSpaceError::TooShort {
            len: f.len(),
            min: scheme.min_samples(),
        });
    }
    let out = match scheme {
        DerivativeScheme::FirstOrderForward => f.windows(2).map(|w| (w[1] - w[0]) / h).collect(),
        DerivativeScheme::ThirdOrderForward => {
            let denom = 6.0 * h;
            f.windows(4)
                .map(|w| (-11.0 * w[0] + 18.0 * w[1] - 9.0 * w[2] + 2.0 * w[3]) / denom)
                .collect()
        }
    };
    Ok(out)
}

/// A point in phase space: voltage (mV) and its time derivative (mV/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub v: f64,
    pub dv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub record_id: String,
    pub points: Vec<PhasePoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes `v_mV,dv_mV_per_s` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "v_mV,dv_mV_per_s")?;
        for p in &self.points {
            writeln!(out, "{},{}", p.v, p.dv)?;
        }
        Ok(())
    }
}

/// Pairs each sample with its derivative. The trailing samples the stencil
/// cannot reach are dropped.
pub fn embed(signal: &Signal, scheme: DerivativeScheme) -> Result<Trajectory, PhaseSpaceError> {
    let dv = derivative(signal, scheme)?;
    let points = signal
        .samples
        .iter()
        .zip(dv)
        .map(|(&v, dv)| PhasePoint { v, dv })
        .collect();
    Ok(Trajectory {
        record_id: signal.record_id.clone(),
        points,
    })
}

/// Index of the global maximum; ties resolve to the earliest sample.
pub fn detect_r_peak(signal: &Signal) -> usize {
    let mut best = 0;
    for (i, &v) in signal.samples.iter().enumerate() {
        if v > signal.samples[best] {
            best = i;
        }
    }
    best
}

/// Default Q search window before the R peak.
pub const DEFAULT_Q_WINDOW_MS: f64 = 50.0;

/// Index of the minimum in the window `[r - round(window * fs), r)`; ties
/// resolve to the earliest sample. Returns 0 when `r_index` is 0.
pub fn detect_q_point(signal: &Signal, r_index: usize, window_ms: f64) -> usize {
    if r_index == 0 {
        return 0;
    }
    let r_index = r_index.min(signal.len());
    let width = (window_ms / 1000.0 * signal.sampling_rate).round().max(1.0) as usize;
    let start = r_index.saturating_sub(width);
    let mut best = start;
    for i in start..r_index {
        if signal.samples[i] < signal.samples[best] {
            best = i;
        }
    }
    best
}

/// Straight segment from the Q point to the R point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRChord {
    pub q_point: PhasePoint,
    pub r_point: PhasePoint,
    pub q_index: usize,
    pub r_index: usize,
}

pub fn qr_chord(trajectory: &Trajectory, q_index: usize, r_index: usize) -> Result<QRChord, PhaseSpaceError> {
    let len = trajectory.len();
    for index in [q_index, r_index] {
        if index >= len {
            return Err(PhaseSpaceError::IndexOutOfRange { index, len });
        }
    }
    if q_index > r_index {
        return Err(PhaseSpaceError::ChordOrder { q: q_index, r: r_index });
    }
    Ok(QRChord {
        q_point: trajectory.points[q_index],
        r_point: trajectory.points[r_index],
        q_index,
        r_index,
    })
}

/// Locates R and Q on the signal and builds the chord on its trajectory.
///
/// An R peak in the last samples, where the stencil gives no derivative, is
/// moved back to the last trajectory index.
pub fn record_chord(signal: &Signal, trajectory: &Trajectory, q_window_ms: f64) -> Result<QRChord, PhaseSpaceError> {
    if trajectory.is_empty() {
        return Err(PhaseSpaceError::IndexOutOfRange { index: 0, len: 0 });
    }
    let r_signal = detect_r_peak(signal);
    let q_index = detect_q_point(signal, r_signal, q_window_ms);
    let last = trajectory.len() - 1;
    let r_index = r_signal.min(last);
    qr_chord(trajectory, q_index.min(r_index), r_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record_io::synth_ecg;

    fn sig(samples: Vec<f64>, rate: f64) -> Signal {
        Signal::new("t", "MLII", rate, samples).unwrap()
    }

    #[test]
    fn third_order_on_ramp_and_cubic() {
        let d = derivative(&sig(vec![0.0, 1.0, 2.0, 3.0], 1.0), DerivativeScheme::ThirdOrderForward).unwrap();
        assert_eq!(d, vec![1.0]);
        let d = derivative(&sig(vec![1.0, 8.0, 27.0, 64.0], 1.0), DerivativeScheme::ThirdOrderForward).unwrap();
        assert_eq!(d, vec![3.0]);
    }

    #[test]
    fn first_order_difference() {
        let d = derivative(&sig(vec![0.0, 1.0, 4.0], 2.0), DerivativeScheme::FirstOrderForward).unwrap();
        assert_eq!(d, vec![2.0, 6.0]);
    }

    #[test]
    fn too_short() {
        let s = sig(vec![1.0, 2.0, 3.0], 1.0);
        assert_eq!(
            derivative(&s, DerivativeScheme::ThirdOrderForward),
            Err(PhaseSpaceError::TooShort { len: 3, min: 4 })
        );
        assert!(derivative(&sig(vec![1.0], 1.0), DerivativeScheme::FirstOrderForward).is_err());
        assert_eq!(embed(&s, DerivativeScheme::FirstOrderForward).unwrap().len(), 2);
    }

    #[test]
    fn embed_constant_and_ramp() {
        let t = embed(&sig(vec![5.0; 5], 360.0), DerivativeScheme::ThirdOrderForward).unwrap();
        assert_eq!(t.points, vec![PhasePoint { v: 5.0, dv: 0.0 }; 2]);
        let ramp: Vec<f64> = (0..10).map(|i| 0.5 * i as f64).collect();
        let t = embed(&sig(ramp, 1.0), DerivativeScheme::ThirdOrderForward).unwrap();
        assert_eq!(t.len(), 7);
        assert!(t.points.iter().all(|p| (p.dv - 0.5).abs() < 1e-12));
    }

    #[test]
    fn r_peak_tie_break() {
        assert_eq!(detect_r_peak(&sig(vec![0.0, 1.0, 3.0, 1.0, 0.0], 1.0)), 2);
        assert_eq!(detect_r_peak(&sig(vec![3.0, 1.0, 3.0], 1.0)), 0);
    }

    #[test]
    fn r_peak_on_synthetic_beat() {
        let s = synth_ecg(2.0, 360.0, 60.0, 0.0, 0).unwrap();
        assert_eq!(detect_r_peak(&s), 144);
    }

    #[test]
    fn q_point_window() {
        // 50 ms at 1000 Hz is 50 samples.
        let mut samples = vec![0.0; 200];
        samples[150] = 5.0;
        samples[145] = -1.0;
        samples[90] = -9.0; // outside the window
        let s = sig(samples, 1000.0);
        assert_eq!(detect_q_point(&s, 150, DEFAULT_Q_WINDOW_MS), 145);

        let rising = sig((0..100).map(f64::from).collect(), 1000.0);
        assert_eq!(detect_q_point(&rising, 80, DEFAULT_Q_WINDOW_MS), 30);
        assert_eq!(detect_q_point(&rising, 20, DEFAULT_Q_WINDOW_MS), 0);
        assert_eq!(detect_q_point(&rising, 0, DEFAULT_Q_WINDOW_MS), 0);
    }

    #[test]
    fn chord_endpoints() {
        let t = embed(&sig((0..10).map(|i| f64::from(i * i)).collect(), 1.0), DerivativeScheme::FirstOrderForward).unwrap();
        let c = qr_chord(&t, 3, 4).unwrap();
        assert_eq!(c.q_point, t.points[3]);
        assert_eq!(c.r_point, t.points[4]);
        assert_eq!(
            qr_chord(&t, 3, 9),
            Err(PhaseSpaceError::IndexOutOfRange { index: 9, len: 9 })
        );
    }

    #[test]
    fn chord_on_synthetic_record_hits_max_voltage() {
        let s = synth_ecg(3.0, 360.0, 70.0, 0.01, 5).unwrap();
        let t = embed(&s, DerivativeScheme::ThirdOrderForward).unwrap();
        let c = record_chord(&s, &t, DEFAULT_Q_WINDOW_MS).unwrap();
        let vmax = t.points.iter().map(|p| p.v).fold(f64::MIN, f64::max);
        assert_eq!(c.r_point.v, vmax);
        assert!(c.q_index < c.r_index);
        assert!(c.q_point.v < c.r_point.v);
    }

    #[test]
    fn chord_clamps_r_in_stencil_tail() {
        let s = sig(vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0], 100.0);
        let t = embed(&s, DerivativeScheme::ThirdOrderForward).unwrap();
        let c = record_chord(&s, &t, DEFAULT_Q_WINDOW_MS).unwrap();
        assert_eq!(c.r_index, 2);
        assert!(c.q_index <= c.r_index);
    }

    #[test]
    fn trajectory_csv() {
        let t = Trajectory {
            record_id: "x".into(),
            points: vec![PhasePoint { v: 1.5, dv: -2.0 }],
        };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "v_mV,dv_mV_per_s\n1.5,-2\n");
    }
}
