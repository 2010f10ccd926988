//! SHA-256 fingerprints used to tie outputs back to their inputs.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Incremental hasher over numeric rows, so that training sets can be
/// fingerprinted without serializing them first.
#[derive(Default)]
pub struct RowDigest(Sha256);

impl RowDigest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_str(&mut self, s: &str) {
        self.0.update((s.len() as u64).to_le_bytes());
        self.0.update(s.as_bytes());
    }

    pub fn push_f64(&mut self, x: f64) {
        self.0.update(x.to_bits().to_le_bytes());
    }

    pub fn push_u64(&mut self, x: u64) {
        self.0.update(x.to_le_bytes());
    }

    pub fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}
