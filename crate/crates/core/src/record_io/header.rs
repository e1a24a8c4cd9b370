use super::{RecordError, Result};

/// Signal storage formats this crate can decode.
pub const SUPPORTED_FORMATS: &[u32] = &[212];

/// One signal line of a record header.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub file_name: String,
    pub name: String,
    pub format_code: u32,
    /// ADU per millivolt.
    pub gain: f64,
    /// ADU value corresponding to 0 mV.
    pub baseline: i32,
}

/// Parsed record header.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub record_id: String,
    pub n_channels: usize,
    pub sampling_rate: f64,
    /// Samples per channel.
    pub n_samples: usize,
    pub channels: Vec<ChannelSpec>,
}

impl RecordHeader {
    /// Header text that `parse_header` reads back to `self`. Initial value,
    /// checksum and block size are written as 0.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {} {}\n",
            self.record_id, self.n_channels, self.sampling_rate, self.n_samples
        );
        for c in &self.channels {
            out += &format!(
                "{} {} {}({}) 12 {} 0 0 0 {}\n",
                c.file_name, c.format_code, c.gain, c.baseline, c.baseline, c.name
            );
        }
        out
    }
}

fn malformed(msg: impl Into<String>) -> RecordError {
    RecordError::MalformedHeader(msg.into())
}

fn leading_number(token: &str) -> &str {
    let end = token
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e'))
        .unwrap_or(token.len());
    &token[..end]
}

/// Parses a header file.
///
/// The record line is `record_id n_channels sampling_rate n_samples [...]`;
/// each signal line is
/// `file format gain[(baseline)][/units] adc_res adc_zero init checksum block name...`.
/// Lines starting with `#` are comments. When the gain field carries no
/// parenthesized baseline, the ADC zero is used.
pub fn parse_header(text: &str) -> Result<RecordHeader> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));

    let record_line = lines.next().ok_or_else(|| malformed("empty header"))?;
    let tokens: Vec<&str> = record_line.split_whitespace().collect();
    if tokens.len() < 4 {
        return Err(malformed(format!(
            "record line needs 4 fields, found {}",
            tokens.len()
        )));
    }
    // A record name may carry a segment count ("name/segments"); multi-segment
    // records are not supported.
    if tokens[0].contains('/') {
        return Err(malformed("multi-segment records are not supported"));
    }
    let record_id = tokens[0].to_string();
    let n_channels: usize = tokens[1]
        .parse()
        .map_err(|_| malformed(format!("bad channel count {:?}", tokens[1])))?;
    // "360/1440" style counter frequencies: keep the sampling frequency.
    let rate_token = tokens[2].split('/').next().unwrap_or_default();
    let sampling_rate: f64 = leading_number(rate_token)
        .parse()
        .map_err(|_| malformed(format!("bad sampling rate {:?}", tokens[2])))?;
    let n_samples: usize = tokens[3]
        .parse()
        .map_err(|_| malformed(format!("bad sample count {:?}", tokens[3])))?;
    if n_channels == 0 {
        return Err(malformed("record has no channels"));
    }
    if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
        return Err(malformed("sampling rate must be positive"));
    }
    if n_samples == 0 {
        return Err(malformed("sample count must be positive"));
    }

    let channels = lines
        .by_ref()
        .take(n_channels)
        .map(parse_channel_line)
        .collect::<Result<Vec<_>>>()?;
    if channels.len() != n_channels {
        return Err(malformed(format!(
            "expected {n_channels} signal lines, found {}",
            channels.len()
        )));
    }

    Ok(RecordHeader {
        record_id,
        n_channels,
        sampling_rate,
        n_samples,
        channels,
    })
}

fn parse_channel_line(line: &str) -> Result<ChannelSpec> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < 9 {
        return Err(malformed(format!(
            "signal line needs 9 fields, found {}: {line:?}",
            tokens.len()
        )));
    }
    let format_token = tokens[1];
    let digits_end = format_token
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(format_token.len());
    let format_code: u32 = format_token[..digits_end]
        .parse()
        .map_err(|_| malformed(format!("bad format {format_token:?}")))?;
    if !SUPPORTED_FORMATS.contains(&format_code) {
        return Err(RecordError::UnsupportedFormat(format_code));
    }

    let gain_field = tokens[2].split('/').next().unwrap_or_default();
    let (gain_str, paren_baseline) = match gain_field.split_once('(') {
        Some((g, rest)) => {
            let b = rest.trim_end_matches(')');
            let b: i32 = b
                .parse()
                .map_err(|_| malformed(format!("bad baseline in {:?}", tokens[2])))?;
            (g, Some(b))
        }
        None => (gain_field, None),
    };
    let gain: f64 = gain_str
        .parse()
        .map_err(|_| malformed(format!("bad gain {:?}", tokens[2])))?;
    if !(gain.is_finite() && gain > 0.0) {
        return Err(malformed(format!("gain must be positive, got {gain}")));
    }
    let adc_zero: i32 = tokens[4]
        .parse()
        .map_err(|_| malformed(format!("bad ADC zero {:?}", tokens[4])))?;
    for (i, t) in tokens.iter().enumerate().take(8).skip(3) {
        if i != 4 && t.parse::<i64>().is_err() {
            return Err(malformed(format!("non-numeric field {t:?}")));
        }
    }

    Ok(ChannelSpec {
        file_name: tokens[0].to_string(),
        name: tokens[8..].join(" "),
        format_code,
        gain,
        baseline: paren_baseline.unwrap_or(adc_zero),
    })
}
