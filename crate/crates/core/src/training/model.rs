//! A trained (or training) network with its normalization and optimizer
//! state, and the checkpoint format.
//!
//! A checkpoint directory holds `model.json` (configuration, variant, seed,
//! epoch, loss settings, normalization statistics, optimizer counters,
//! parameter order and blob checksums) and three little-endian `f64` blobs:
//! `params.f64`, `adam_m.f64`, `adam_v.f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fno::{FnoConfig, Network, Variant};
use crate::normalization::NormalizationStats;
use crate::spectral_grid::{Mat3, RealTensorField};

use super::adam::Adam;
use super::io::{read_f64_blob, read_json, write_f64_blob, write_json};
use super::loss::LossConfig;

pub const CHECKPOINT_VERSION: u32 = 1;

const PARAMETER_ORDER: &str = "W_inp[width][11]; per layer: K[slot][out][in][re,im], \
W[out][in], b[out]; W_out[row][width] (rows: 11,12,21,22,33 for Pg/Pi; all nine for Pe)";

#[derive(Debug, Clone)]
pub struct FnoModel {
    pub network: Network,
    pub params: Vec<f64>,
    pub stats: NormalizationStats,
    pub loss: LossConfig,
    pub seed: u64,
    /// Completed training epochs.
    pub epoch: usize,
    pub adam: Adam,
}

impl FnoModel {
    /// Freshly initialized model for `variant`.
    pub fn new(
        cfg: FnoConfig,
        loss: LossConfig,
        stats: NormalizationStats,
        seed: u64,
    ) -> Result<Self> {
        loss.validate()?;
        stats.check()?;
        let network = Network::new(cfg, loss.variant)?;
        let params = network.init_params(seed);
        let adam = Adam::new(params.len());
        Ok(FnoModel {
            network,
            params,
            stats,
            loss,
            seed,
            epoch: 0,
            adam,
        })
    }

    pub fn variant(&self) -> Variant {
        self.network.variant()
    }

    pub fn predict(&self, e: &[f64], nu: &[f64], f_bar: &Mat3) -> Result<RealTensorField> {
        self.network
            .predict(&self.params, &self.stats, e, nu, f_bar)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let blob = |name: &str, data: &[f64]| -> Result<BlobEntry> {
            Ok(BlobEntry {
                file: name.into(),
                len: data.len(),
                sha256: write_f64_blob(&dir.join(name), data)?,
            })
        };
        let meta = CheckpointMeta {
            format_version: CHECKPOINT_VERSION,
            config: *self.network.config(),
            variant: self.variant(),
            seed: self.seed,
            epoch: self.epoch,
            loss: self.loss,
            stats: self.stats.clone(),
            n_params: self.params.len(),
            parameter_order: PARAMETER_ORDER.into(),
            adam: self.adam.clone(),
            params: blob("params.f64", &self.params)?,
            adam_m: blob("adam_m.f64", &self.adam.m)?,
            adam_v: blob("adam_v.f64", &self.adam.v)?,
        };
        write_json(&dir.join("model.json"), &meta)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta: CheckpointMeta = read_json(&dir.join("model.json"))?;
        if meta.format_version != CHECKPOINT_VERSION {
            return Err(Error::Corrupt(format!(
                "unsupported checkpoint version {}",
                meta.format_version
            )));
        }
        if meta.loss.variant != meta.variant {
            return Err(Error::Corrupt(
                "loss variant differs from model variant".into(),
            ));
        }
        let network = Network::new(meta.config, meta.variant)?;
        if meta.n_params != network.n_params() {
            return Err(Error::Mismatch(format!(
                "checkpoint declares {} parameters, architecture needs {}",
                meta.n_params,
                network.n_params()
            )));
        }
        let read = |b: &BlobEntry| {
            if b.len != meta.n_params {
                return Err(Error::Corrupt(format!("{}: wrong length", b.file)));
            }
            read_f64_blob(&dir.join(&b.file), b.len, &b.sha256)
        };
        let mut adam = meta.adam.clone();
        adam.m = read(&meta.adam_m)?;
        adam.v = read(&meta.adam_v)?;
        Ok(FnoModel {
            network,
            params: read(&meta.params)?,
            stats: meta.stats,
            loss: meta.loss,
            seed: meta.seed,
            epoch: meta.epoch,
            adam,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct BlobEntry {
    file: String,
    len: usize,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointMeta {
    format_version: u32,
    config: FnoConfig,
    variant: Variant,
    seed: u64,
    epoch: usize,
    loss: LossConfig,
    stats: NormalizationStats,
    n_params: usize,
    parameter_order: String,
    adam: Adam,
    params: BlobEntry,
    adam_m: BlobEntry,
    adam_v: BlobEntry,
}
