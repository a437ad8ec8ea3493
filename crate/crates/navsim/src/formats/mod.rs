//! On-disk formats: `MMN1` models, `ILD1` datasets, map exports and debug
//! images.

pub mod dataset;
pub mod image;
pub mod map;
pub mod model;

use crate::error::{Error, Result};

/// Little-endian cursor over a byte slice; running out of bytes is a
/// truncated file.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::TruncatedFile);
        }
        let (head, tail) = self.bytes.split_at(n);
        self.bytes = tail;
        Ok(head)
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len()
    }

    pub fn expect_magic(&mut self, magic: &'static str) -> Result<()> {
        let got = self.take(magic.len()).map_err(|_| Error::BadMagic { expected: magic })?;
        if got != magic.as_bytes() {
            return Err(Error::BadMagic { expected: magic });
        }
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        match self.bytes.len() {
            0 => Ok(()),
            n => Err(Error::TrailingData(n)),
        }
    }
}
