//! Raw little-endian `f64` blobs with SHA-256 checksums.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn f64_bytes(data: &[f64]) -> Vec<u8> {
    data.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Writes `data` and returns its checksum.
pub(crate) fn write_f64_blob(path: &Path, data: &[f64]) -> Result<String> {
    let bytes = f64_bytes(data);
    fs::write(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

/// Reads a blob, verifying length and checksum.
pub(crate) fn read_f64_blob(path: &Path, len: usize, sha256: &str) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() != len * 8 {
        return Err(Error::Corrupt(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            len * 8,
            bytes.len()
        )));
    }
    if sha256_hex(&bytes) != sha256 {
        return Err(Error::Corrupt(format!(
            "{}: checksum mismatch",
            path.display()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Corrupt(format!("{}: {e}", path.display())))
}
