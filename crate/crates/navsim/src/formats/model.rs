//! `MMN1` model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "MMN1"
//! u32                       number of tensors
//! per tensor: u32 rank, rank × u32 dims
//! f32 × Σ dims              values, tensors in manifest order
//! ```

use std::fs;
use std::path::Path;

use navsim_core::nn::{ModelParams, GROUPS};

use super::Reader;
use crate::error::{Error, Result};

pub const MAGIC: &str = "MMN1";

pub fn encode(params: &ModelParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + ModelParams::<f32>::PARAM_COUNT * 4 + 256);
    out.extend_from_slice(MAGIC.as_bytes());
    out.extend_from_slice(&(GROUPS.len() as u32).to_le_bytes());
    for g in &GROUPS {
        out.extend_from_slice(&(g.shape.len() as u32).to_le_bytes());
        for &d in g.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for v in params.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    let count = r.u32()? as usize;
    if count != GROUPS.len() {
        return Err(Error::ShapeManifestMismatch(format!("{count} tensors, expected {}", GROUPS.len())));
    }
    for g in &GROUPS {
        let rank = r.u32()? as usize;
        let dims = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if dims != g.shape {
            return Err(Error::ShapeManifestMismatch(format!("{} has shape {dims:?}, expected {:?}", g.name, g.shape)));
        }
    }
    let n = ModelParams::<f32>::PARAM_COUNT;
    let raw = r.take(n * 4)?;
    r.finish()?;
    let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    Ok(ModelParams::from_vec(values).expect("length checked"))
}

pub fn save(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(params))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<ModelParams> {
    decode(&fs::read(path)?)
}
