//! 16-bit PGM field maps with a JSON sidecar holding the value range, and
//! raw little-endian `f64` blobs.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub label: String,
    pub width: usize,
    pub height: usize,
    /// Value mapped to grey level 0.
    pub min: f64,
    /// Value mapped to grey level 65535.
    pub max: f64,
}

/// Writes `values` (row-major, `n x n`) to `<stem>.pgm` and `<stem>.json`.
pub fn write_map(stem: &Path, label: &str, values: &[f64], n: usize) -> Result<MapMeta> {
    if values.len() != n * n {
        return Err(Error::shape(n * n, values.len()));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let mut bytes = format!("P5\n{n} {n}\n65535\n").into_bytes();
    for v in values {
        let level = (((v - min) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    std::fs::File::create(stem.with_extension("pgm"))?.write_all(&bytes)?;
    let meta = MapMeta {
        label: label.into(),
        width: n,
        height: n,
        min,
        max,
    };
    super::io::write_json(&stem.with_extension("json"), &meta)?;
    Ok(meta)
}

/// Writes a raw little-endian `f64` blob and returns its SHA-256.
pub fn write_raw(path: &Path, data: &[f64]) -> Result<String> {
    super::io::write_f64_blob(path, data)
}

/// Reads a raw little-endian `f64` blob of any length.
pub fn read_raw(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Corrupt(format!(
            "{}: length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
