//! Periodic Voronoi polycrystals with per-grain isotropic moduli.
//!
//! Every sample draws from its own ChaCha8 stream (`seed`, stream =
//! sample index), so sample `i` is reproducible on its own and independent
//! of how many samples are generated or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_grid::GridConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrostructureConfig {
    pub grid: GridConfig,
    /// Relative grain size; the grain count is `round(s_u^-2)`.
    pub s_u: f64,
    /// Young's modulus range in GPa.
    pub e_range: (f64, f64),
    /// Poisson ratio range.
    pub nu_range: (f64, f64),
}

impl MicrostructureConfig {
    pub fn new(grid: GridConfig, s_u: f64) -> Self {
        MicrostructureConfig {
            grid,
            s_u,
            e_range: (50.0, 200.0),
            nu_range: (0.25, 0.35),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.grid.spatial_dims != 2 {
            return Err(Error::Config(
                "microstructures are generated in plane mode".into(),
            ));
        }
        if !(self.s_u > 0.0 && self.s_u <= 1.0) {
            return Err(Error::Config(format!(
                "s_u must lie in (0, 1], got {}",
                self.s_u
            )));
        }
        let (e0, e1) = self.e_range;
        if !(e0 > 0.0 && e0 <= e1 && e1.is_finite()) {
            return Err(Error::Config(format!("invalid E range {e0}..{e1}")));
        }
        let (n0, n1) = self.nu_range;
        if !(n0 > -1.0 && n0 <= n1 && n1 < 0.5) {
            return Err(Error::Config(format!("invalid nu range {n0}..{n1}")));
        }
        Ok(())
    }

    pub fn n_seeds(&self) -> usize {
        (1.0 / (self.s_u * self.s_u)).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Microstructure {
    pub grid: GridConfig,
    /// Seed positions in `[0, l)^2`.
    pub seeds: Vec<[f64; 2]>,
    pub grain_e: Vec<f64>,
    pub grain_nu: Vec<f64>,
    /// Grain id per pixel.
    pub grain_id: Vec<u32>,
    /// Young's modulus per pixel (GPa).
    pub e: Vec<f64>,
    /// Poisson ratio per pixel.
    pub nu: Vec<f64>,
}

/// Draws seeds and grain moduli for sample `index` and tessellates.
pub fn generate_microstructure(
    cfg: &MicrostructureConfig,
    seed: u64,
    index: u64,
) -> Result<Microstructure> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let l = cfg.grid.ell_u;
    let n_seeds = cfg.n_seeds();
    let seeds: Vec<[f64; 2]> = (0..n_seeds)
        .map(|_| [rng.gen_range(0.0..l), rng.gen_range(0.0..l)])
        .collect();
    let grain_e = (0..n_seeds)
        .map(|_| uniform(&mut rng, cfg.e_range))
        .collect();
    let grain_nu = (0..n_seeds)
        .map(|_| uniform(&mut rng, cfg.nu_range))
        .collect();
    tessellate_from_seeds(cfg.grid, seeds, grain_e, grain_nu)
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Periodic nearest-seed assignment of pixels `x = i l / n`; ties go to the
/// lowest seed index.
pub fn tessellate_from_seeds(
    grid: GridConfig,
    seeds: Vec<[f64; 2]>,
    grain_e: Vec<f64>,
    grain_nu: Vec<f64>,
) -> Result<Microstructure> {
    grid.validate()?;
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    if grain_e.len() != seeds.len() || grain_nu.len() != seeds.len() {
        return Err(Error::shape(seeds.len(), grain_e.len().min(grain_nu.len())));
    }
    let n = grid.n_dis;
    let l = grid.ell_u;
    let periodic = |a: f64, b: f64| {
        let d = (a - b).abs() % l;
        d.min(l - d)
    };
    let grain_id: Vec<u32> = (0..n * n)
        .map(|p| {
            let x = [grid.coordinate(p / n), grid.coordinate(p % n)];
            let mut best = (f64::INFINITY, 0u32);
            for (s, c) in seeds.iter().enumerate() {
                let dx = periodic(x[0], c[0]);
                let dy = periodic(x[1], c[1]);
                let d2 = dx * dx + dy * dy;
                if d2 < best.0 {
                    best = (d2, s as u32);
                }
            }
            best.1
        })
        .collect();
    let e = grain_id.iter().map(|&g| grain_e[g as usize]).collect();
    let nu = grain_id.iter().map(|&g| grain_nu[g as usize]).collect();
    Ok(Microstructure {
        grid,
        seeds,
        grain_e,
        grain_nu,
        grain_id,
        e,
        nu,
    })
}

impl Microstructure {
    /// Pixels with a periodic 4-neighbour in a different grain.
    pub fn boundary_mask(&self) -> Vec<bool> {
        boundary_mask(&self.grain_id, self.grid.n_dis)
    }

    pub fn n_grains(&self) -> usize {
        self.seeds.len()
    }
}

/// Pixels of an `n x n` grain-id map with a periodic 4-neighbour in a
/// different grain.
pub fn boundary_mask(grain_id: &[u32], n: usize) -> Vec<bool> {
    (0..n * n)
        .map(|p| {
            let (i, j) = (p / n, p % n);
            let g = grain_id[p];
            [
                ((i + 1) % n) * n + j,
                ((i + n - 1) % n) * n + j,
                i * n + (j + 1) % n,
                i * n + (j + n - 1) % n,
            ]
            .iter()
            .any(|&q| grain_id[q] != g)
        })
        .collect()
}

/// Periodic Chebyshev distance (in pixels) from every pixel to the nearest
/// `true` entry of `mask` on an `n x n` grid; `None` if the mask is empty.
pub fn chebyshev_distance_map(mask: &[bool], n: usize) -> Option<Vec<usize>> {
    let targets: Vec<(usize, usize)> = mask
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(p, _)| (p / n, p % n))
        .collect();
    if targets.is_empty() {
        return None;
    }
    let wrap = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    Some(
        (0..n * n)
            .map(|p| {
                let (i, j) = (p / n, p % n);
                targets
                    .iter()
                    .map(|&(a, b)| wrap(i, a).max(wrap(j, b)))
                    .min()
                    .unwrap()
            })
            .collect(),
    )
}
