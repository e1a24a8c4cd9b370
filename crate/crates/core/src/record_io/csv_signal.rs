use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{RecordError, Result, Signal};

const UNIFORMITY_TOLERANCE: f64 = 1e-6;

/// Loads a CSV signal. The record id is the file stem.
///
/// Two-column files are `time_s,voltage_mV` and the sampling rate is inferred
/// from the time column. Single-column files hold millivolts and need
/// `sampling_rate`.
pub fn load_csv(path: &Path, sampling_rate: Option<f64>) -> Result<Signal> {
    let file = File::open(path).map_err(|source| RecordError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let record_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(file, &record_id, sampling_rate)
}

pub fn parse_csv<R: Read>(reader: R, record_id: &str, sampling_rate: Option<f64>) -> Result<Signal> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| RecordError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        // A header row is recognized by a non-numeric first token.
        if row == 0 && fields[0].parse::<f64>().is_err() && fields.iter().any(|f| f.chars().any(char::is_alphabetic)) {
            width = Some(fields.len());
            continue;
        }
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected || !(1..=2).contains(&fields.len()) {
            return Err(RecordError::MalformedRow {
                row,
                reason: format!("expected {expected} column(s) (1 or 2), got {}", fields.len()),
            });
        }
        let parsed = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| RecordError::MalformedRow {
                        row,
                        reason: format!("not a finite number: {f:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let [t, v] = parsed[..] {
            times.push((row, t));
            values.push(v);
        } else {
            values.push(parsed[0]);
        }
    }

    let rate = if times.len() >= 2 {
        let step = times[1].1 - times[0].1;
        if step <= 0.0 {
            return Err(RecordError::NonUniformSampling { row: times[1].0 });
        }
        for pair in times.windows(2) {
            let dt = pair[1].1 - pair[0].1;
            if ((dt - step) / step).abs() > UNIFORMITY_TOLERANCE {
                return Err(RecordError::NonUniformSampling { row: pair[1].0 });
            }
        }
        let span = times[times.len() - 1].1 - times[0].1;
        let rate = (times.len() - 1) as f64 / span;
        // Time columns are printed decimals; snap to an integer rate when the
        // difference is only round-off.
        if (rate - rate.round()).abs() <= UNIFORMITY_TOLERANCE * rate {
            rate.round()
        } else {
            rate
        }
    } else {
        sampling_rate.ok_or_else(|| {
            RecordError::InvalidSignal("sampling rate needed for a single-column or single-row CSV".into())
        })?
    };

    Signal::new(record_id, "MLII", rate, values)
}

/// Writes `time_s,voltage_mV` rows using shortest round-trip formatting.
pub fn write_csv<W: Write>(signal: &Signal, mut out: W) -> std::io::Result<()> {
    writeln!(out, "time_s,voltage_mV")?;
    for (i, v) in signal.samples.iter().enumerate() {
        writeln!(out, "{},{}", i as f64 / signal.sampling_rate, v)?;
    }
    Ok(())
}
