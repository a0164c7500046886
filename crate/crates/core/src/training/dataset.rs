//! Equilibrium stress datasets: generation, resampling and on-disk format.
//!
//! Layout of a dataset directory:
//!
//! * `manifest.json`: configuration, split sizes, per-sample load,
//!   solver statistics and the SHA-256 of every blob.
//! * `sample_NNNNN_{e,nu,grain,p}.f64`: little-endian `f64`, row-major.
//!   `e`, `nu`, `grain` have shape `[n_dis, n_dis]`; `p` has shape
//!   `[n_dis, n_dis, 3, 3]` (first Piola-Kirchhoff stress, MPa).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::microstructure::{boundary_mask, generate_microstructure, MicrostructureConfig};
use crate::normalization::{NormalizationStats, StatsSample};
use crate::solver::{solve_equilibrium, SolverConfig};
use crate::spectral_grid::{GridConfig, Mat3, RealTensorField, SpectralGrid};

use super::io::{read_f64_blob, read_json, write_f64_blob, write_json};

pub const FORMAT_VERSION: u32 = 1;

/// How fields solved at `n_res` are brought to `n_dis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Downsample {
    /// Every `(n_res / n_dis)`-th point.
    #[default]
    Stride,
    /// Stress keeps only the Fourier modes representable on the coarse grid
    /// (the coarse Nyquist lines dropped); material fields are strided.
    /// Preserves the discrete equilibrium on the coarse grid.
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub n_dat: usize,
    pub n_res: usize,
    pub n_dis: usize,
    pub ell_u: f64,
    pub s_u: f64,
    pub e_range: (f64, f64),
    pub nu_range: (f64, f64),
    /// `F_bar_22` values, assigned to samples cyclically.
    pub loads: Vec<f64>,
    pub seed: u64,
    pub solver: SolverConfig,
    pub downsample: Downsample,
}

impl DatasetConfig {
    /// Desk-scale defaults: 64 samples on a 32 x 32 grid, grain size 1/3.
    pub fn desk() -> Self {
        DatasetConfig {
            n_dat: 64,
            n_res: 32,
            n_dis: 32,
            ell_u: 1.0,
            s_u: 1.0 / 3.0,
            e_range: (50.0, 200.0),
            nu_range: (0.25, 0.35),
            loads: vec![1.002, 1.004],
            seed: 0,
            solver: SolverConfig::default(),
            downsample: Downsample::Stride,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dat == 0 {
            return Err(Error::Config("n_dat must be positive".into()));
        }
        GridConfig::plane(self.n_res, self.ell_u)?;
        GridConfig::plane(self.n_dis, self.ell_u)?;
        if self.n_dis > self.n_res || !self.n_res.is_multiple_of(self.n_dis) {
            return Err(Error::Config(format!(
                "n_dis ({}) must divide n_res ({})",
                self.n_dis, self.n_res
            )));
        }
        if self.loads.is_empty() || self.loads.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::Config(
                "loads must be a non-empty list of positive F22".into(),
            ));
        }
        self.micro_config()?.validate()
    }

    pub fn micro_config(&self) -> Result<MicrostructureConfig> {
        Ok(MicrostructureConfig {
            grid: GridConfig::plane(self.n_res, self.ell_u)?,
            s_u: self.s_u,
            e_range: self.e_range,
            nu_range: self.nu_range,
        })
    }

    pub fn grid(&self) -> Result<GridConfig> {
        GridConfig::plane(self.n_dis, self.ell_u)
    }

    /// Test split size `n_dat / 4`; the training split is the rest.
    pub fn n_tes(&self) -> usize {
        self.n_dat / 4
    }

    pub fn n_tra(&self) -> usize {
        self.n_dat - self.n_tes()
    }
}

pub fn load_gradient(f22: f64) -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, f22, 0.0], [0.0, 0.0, 1.0]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub f_bar: Mat3,
    pub e: Vec<f64>,
    pub nu: Vec<f64>,
    pub grain_id: Vec<u32>,
    pub p: RealTensorField,
    pub solver_iterations: usize,
    pub solver_residual: f64,
}

impl Sample {
    /// Pixels with a periodic 4-neighbour in another grain.
    pub fn boundary_mask(&self) -> Vec<bool> {
        boundary_mask(&self.grain_id, self.p.grid.n_dis)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: DatasetConfig,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn train(&self) -> &[Sample] {
        &self.samples[..self.config.n_tra()]
    }

    pub fn test(&self) -> &[Sample] {
        &self.samples[self.config.n_tra()..]
    }

    /// Min-max statistics of the training split.
    pub fn fit_stats(&self) -> Result<NormalizationStats> {
        NormalizationStats::fit(self.train().iter().map(|s| StatsSample {
            e: &s.e,
            f_bar: &s.f_bar,
            p: &s.p.data,
        }))
    }
}

fn stride<T: Copy>(v: &[T], n_res: usize, n_dis: usize) -> Vec<T> {
    let r = n_res / n_dis;
    (0..n_dis * n_dis)
        .map(|q| v[(q / n_dis) * r * n_res + (q % n_dis) * r])
        .collect()
}

/// Resamples a stress field from its own grid to `coarse`.
pub fn downsample_stress(
    p: &RealTensorField,
    coarse: GridConfig,
    mode: Downsample,
) -> Result<RealTensorField> {
    let fine = p.grid;
    if fine == coarse {
        return Ok(p.clone());
    }
    if fine.spatial_dims != 2
        || coarse.spatial_dims != 2
        || !fine.n_dis.is_multiple_of(coarse.n_dis)
    {
        return Err(Error::shape(format!("{fine:?}"), format!("{coarse:?}")));
    }
    match mode {
        Downsample::Stride => Ok(RealTensorField {
            grid: coarse,
            data: stride(&p.data, fine.n_dis, coarse.n_dis),
        }),
        Downsample::Spectral => {
            let fg = SpectralGrid::new(fine)?;
            let cg = SpectralGrid::new(coarse)?;
            let spec = fg.dft_forward(p)?;
            let (nf, nc) = (fine.n_dis, coarse.n_dis);
            let (hf, hc) = (fine.half(), coarse.half());
            let mut out = vec![crate::tensor_core::ComplexMatrix3::zero(); coarse.n_modes()];
            for (idx, m) in out.iter_mut().enumerate() {
                let (j1, j2) = (idx / hc, idx % hc);
                if j1 == nc / 2 || j2 == nc / 2 {
                    continue;
                }
                let f1 = if j1 < nc / 2 { j1 } else { nf - (nc - j1) };
                *m = spec.data[f1 * hf + j2];
            }
            cg.dft_inverse(&crate::spectral_grid::SpectralTensorField {
                grid: coarse,
                data: out,
            })
        }
    }
}

/// Generates one sample: microstructure, equilibrium solve at `n_res`,
/// resampling to `n_dis`.
pub fn generate_sample(cfg: &DatasetConfig, grid: &SpectralGrid, index: usize) -> Result<Sample> {
    let micro = generate_microstructure(&cfg.micro_config()?, cfg.seed, index as u64)?;
    let f_bar = load_gradient(cfg.loads[index % cfg.loads.len()]);
    let sol = solve_equilibrium(grid, &micro.e, &micro.nu, f_bar, &cfg.solver)?;
    let coarse = cfg.grid()?;
    Ok(Sample {
        index,
        f_bar,
        e: stride(&micro.e, cfg.n_res, cfg.n_dis),
        nu: stride(&micro.nu, cfg.n_res, cfg.n_dis),
        grain_id: stride(&micro.grain_id, cfg.n_res, cfg.n_dis),
        p: downsample_stress(&sol.p, coarse, cfg.downsample)?,
        solver_iterations: sol.iterations,
        solver_residual: sol.residual,
    })
}

/// Generates the whole dataset. Samples are independent and generated in
/// parallel under `exec`; the result does not depend on the policy.
pub fn generate_dataset(cfg: &DatasetConfig, exec: Exec) -> Result<Dataset> {
    cfg.validate()?;
    let grid = SpectralGrid::new(GridConfig::plane(cfg.n_res, cfg.ell_u)?)?;
    let samples = exec.try_map(cfg.n_dat, |i| {
        generate_sample(cfg, &grid, i).map_err(|e| Error::Sample {
            index: i,
            source: Box::new(e),
        })
    })?;
    Ok(Dataset {
        config: cfg.clone(),
        samples,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct BlobRef {
    file: String,
    shape: Vec<usize>,
    sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleEntry {
    index: usize,
    split: String,
    f_bar: Mat3,
    solver_iterations: usize,
    solver_residual: f64,
    e: BlobRef,
    nu: BlobRef,
    grain: BlobRef,
    p: BlobRef,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    config: DatasetConfig,
    n_tra: usize,
    n_tes: usize,
    samples: Vec<SampleEntry>,
}

impl Dataset {
    /// Writes the dataset directory (created if missing). Output bytes are a
    /// pure function of the dataset.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let n = self.config.n_dis;
        let n_tra = self.config.n_tra();
        let mut entries = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            let blob = |field: &str, data: &[f64], shape: Vec<usize>| -> Result<BlobRef> {
                let file = format!("sample_{:05}_{field}.f64", s.index);
                let sha256 = write_f64_blob(&dir.join(&file), data)?;
                Ok(BlobRef {
                    file,
                    shape,
                    sha256,
                })
            };
            let grain: Vec<f64> = s.grain_id.iter().map(|&g| g as f64).collect();
            let p: Vec<f64> = s.p.data.iter().flatten().flatten().copied().collect();
            entries.push(SampleEntry {
                index: s.index,
                split: if s.index < n_tra { "train" } else { "test" }.into(),
                f_bar: s.f_bar,
                solver_iterations: s.solver_iterations,
                solver_residual: s.solver_residual,
                e: blob("e", &s.e, vec![n, n])?,
                nu: blob("nu", &s.nu, vec![n, n])?,
                grain: blob("grain", &grain, vec![n, n])?,
                p: blob("p", &p, vec![n, n, 3, 3])?,
            });
        }
        write_json(
            &dir.join("manifest.json"),
            &Manifest {
                format_version: FORMAT_VERSION,
                config: self.config.clone(),
                n_tra,
                n_tes: self.config.n_tes(),
                samples: entries,
            },
        )
    }

    /// Loads and verifies a dataset directory.
    pub fn load(dir: &Path) -> Result<Self> {
        let m: Manifest = read_json(&dir.join("manifest.json"))?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Corrupt(format!(
                "unsupported dataset format version {}",
                m.format_version
            )));
        }
        m.config.validate()?;
        if m.samples.len() != m.config.n_dat
            || m.n_tra != m.config.n_tra()
            || m.n_tes != m.config.n_tes()
        {
            return Err(Error::Corrupt("manifest counts are inconsistent".into()));
        }
        let grid = m.config.grid()?;
        let n = grid.n_points();
        let read = |b: &BlobRef, len: usize| read_f64_blob(&dir.join(&b.file), len, &b.sha256);
        let samples = m
            .samples
            .iter()
            .map(|s| {
                let p = read(&s.p, 9 * n)?;
                Ok(Sample {
                    index: s.index,
                    f_bar: s.f_bar,
                    e: read(&s.e, n)?,
                    nu: read(&s.nu, n)?,
                    grain_id: read(&s.grain, n)?.iter().map(|&g| g as u32).collect(),
                    p: RealTensorField {
                        grid,
                        data: p
                            .chunks_exact(9)
                            .map(|c| [[c[0], c[1], c[2]], [c[3], c[4], c[5]], [c[6], c[7], c[8]]])
                            .collect(),
                    },
                    solver_iterations: s.solver_iterations,
                    solver_residual: s.solver_residual,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            config: m.config,
            samples,
        })
    }
}
