//! Binary model checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! b"ECGPCNN\0"  u32 version  u64 meta_len  meta_len bytes of JSON
//! u32 tensor_count
//! per tensor: u32 ndim, ndim x u64 dims, prod(dims) x f64
//! ```
//!
//! The JSON holds the architecture under `"model"` and caller-supplied run
//! metadata under `"metadata"`. Values are stored as raw IEEE-754 bits so a
//! round trip is exact.

use serde::{Deserialize, Serialize};

use super::{Model, ModelConfig, NnError};

const MAGIC: &[u8; 8] = b"ECGPCNN\0";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Meta {
    model: ModelConfig,
    metadata: serde_json::Value,
}

pub fn write_checkpoint(model: &Model, metadata: &serde_json::Value) -> Vec<u8> {
    let meta = serde_json::to_vec(&Meta {
        model: model.config,
        metadata: metadata.clone(),
    })
    .expect("checkpoint metadata serializes");
    let mut out = Vec::with_capacity(32 + meta.len() + model.param_count() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
    out.extend_from_slice(&meta);
    let shapes = model.param_shapes();
    out.extend_from_slice(&(shapes.len() as u32).to_le_bytes());
    for (shape, values) in shapes.iter().zip(model.params()) {
        out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &d in shape {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| NnError::CorruptCheckpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn corrupt(msg: impl Into<String>) -> NnError {
    NnError::CorruptCheckpoint(msg.into())
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<(Model, serde_json::Value), NnError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(MAGIC.len())? != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let meta_len = usize::try_from(cur.u64()?).map_err(|_| corrupt("metadata length overflow"))?;
    let meta: Meta = serde_json::from_slice(cur.take(meta_len)?)
        .map_err(|e| corrupt(format!("metadata: {e}")))?;
    meta.model
        .validate()
        .map_err(|e| corrupt(format!("architecture: {e}")))?;
    let mut model = Model::zeros(meta.model);
    let shapes = model.param_shapes();
    let count = cur.u32()? as usize;
    if count != shapes.len() {
        return Err(corrupt(format!("expected {} tensors, found {count}", shapes.len())));
    }
    for (expected, values) in shapes.iter().zip(model.params_mut()) {
        let ndim = cur.u32()? as usize;
        let shape = (0..ndim)
            .map(|_| cur.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>, _>>()?;
        if &shape != expected {
            return Err(corrupt(format!("tensor shape {shape:?}, expected {expected:?}")));
        }
        let raw = cur.take(values.len() * 8)?;
        for (v, chunk) in values.iter_mut().zip(raw.chunks_exact(8)) {
            *v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        }
    }
    if cur.pos != bytes.len() {
        return Err(corrupt(format!("{} trailing bytes", bytes.len() - cur.pos)));
    }
    Ok((model, meta.metadata))
}
