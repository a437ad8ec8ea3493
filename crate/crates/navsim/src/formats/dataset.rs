//! `ILD1` demonstration datasets.
//!
//! ```text
//! "ILD1", u32 version (= 1), u64 record count
//! per record: 20 × f32 LiDAR ranges, 12288 × u8 image (round(v·255)),
//!             u8 action code
//! ```
//!
//! Images are stored quantised to 8 bits, so a round trip reproduces pixel
//! values to within 1/255.

use std::fs;
use std::path::Path;

use navsim_core::sensors::{CameraFrame, LidarScan, SensorFrame, IMAGE_LEN, LIDAR_BEAMS};
use navsim_core::trainer::{Dataset, SampleRecord};
use navsim_core::world::Action;

use super::Reader;
use crate::error::{Error, Result};

pub const MAGIC: &str = "ILD1";
pub const VERSION: u32 = 1;
pub const RECORD_LEN: usize = LIDAR_BEAMS * 4 + IMAGE_LEN + 1;

pub fn encode(dataset: &Dataset) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + dataset.len() * RECORD_LEN);
    out.extend_from_slice(MAGIC.as_bytes());
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dataset.len() as u64).to_le_bytes());
    for r in dataset.records() {
        for v in r.frame.lidar.ranges {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&r.frame.image.to_bytes());
        out.push(r.action.code());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes);
    r.expect_magic(MAGIC)?;
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let count = r.u64()?;
    if (r.remaining() as u64) < count.saturating_mul(RECORD_LEN as u64) {
        return Err(Error::TruncatedFile);
    }
    let mut records = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let mut ranges = [0f32; LIDAR_BEAMS];
        for v in &mut ranges {
            *v = r.f32()?;
        }
        let image = CameraFrame::from_bytes(r.take(IMAGE_LEN)?).expect("image length");
        let code = r.take(1)?[0];
        let action = Action::from_code(code).ok_or(Error::BadActionCode(code))?;
        records.push(SampleRecord { frame: SensorFrame { lidar: LidarScan { ranges }, image }, action });
    }
    r.finish()?;
    Ok(Dataset::from_records(records))
}

pub fn save(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode(dataset))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
    decode(&fs::read(path)?)
}
