use super::{RecordError, Result};

const MIN_12BIT: i32 = -2048;
const MAX_12BIT: i32 = 2047;

fn sign_extend_12(v: u16) -> i32 {
    let v = i32::from(v & 0x0FFF);
    if v >= 2048 {
        v - 4096
    } else {
        v
    }
}

/// Decodes format-212 data into `n_samples` frames of `n_channels` values.
///
/// Every 3 bytes hold two 12-bit two's-complement samples:
/// `a = b0 | (b1 & 0x0F) << 8`, `b = b2 | (b1 & 0xF0) << 4`. Samples are
/// interleaved across channels. An odd trailing sample occupies two bytes.
pub fn decode_format212(bytes: &[u8], n_samples: usize, n_channels: usize) -> Result<Vec<Vec<i32>>> {
    let total = n_samples * n_channels;
    let needed = (total * 3).div_ceil(2);
    if bytes.len() < needed {
        return Err(RecordError::TruncatedData {
            needed,
            got: bytes.len(),
        });
    }

    let mut flat = Vec::with_capacity(total);
    for group in bytes[..needed].chunks(3) {
        let b0 = u16::from(group[0]);
        let b1 = u16::from(group[1]);
        flat.push(sign_extend_12(b0 | (b1 & 0x0F) << 8));
        if flat.len() == total {
            break;
        }
        let b2 = u16::from(group[2]);
        flat.push(sign_extend_12(b2 | (b1 & 0xF0) << 4));
    }
    debug_assert_eq!(flat.len(), total);

    Ok(flat
        .chunks(n_channels.max(1))
        .map(<[i32]>::to_vec)
        .collect())
}

/// Packs frames of 12-bit samples into format-212 bytes.
pub fn encode_format212(frames: &[Vec<i32>]) -> Result<Vec<u8>> {
    let flat: Vec<i32> = frames.iter().flatten().copied().collect();
    if let Some(&bad) = flat.iter().find(|v| !(MIN_12BIT..=MAX_12BIT).contains(*v)) {
        return Err(RecordError::OutOfRange(bad));
    }
    let mut out = Vec::with_capacity((flat.len() * 3).div_ceil(2));
    for pair in flat.chunks(2) {
        let a = (pair[0] & 0x0FFF) as u16;
        out.push((a & 0xFF) as u8);
        match pair.get(1) {
            Some(&b) => {
                let b = (b & 0x0FFF) as u16;
                out.push(((a >> 8) | ((b >> 8) << 4)) as u8);
                out.push((b & 0xFF) as u8);
            }
            None => out.push((a >> 8) as u8),
        }
    }
    Ok(out)
}
