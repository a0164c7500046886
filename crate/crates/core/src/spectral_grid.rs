//! Uniform periodic grids, the normalized DFT pair, and whole-field
//! curl / inc / div / grad built on the single-mode algebra of
//! [`crate::tensor_core`].
//!
//! Physical-space fields are stored row-major with the last spatial axis
//! contiguous: point `(i1, i2)` lives at `i1 * n + i2` in plane mode and
//! `(i1, i2, i3)` at `(i1 * n + i2) * n + i3` in 3D. Spectra use the
//! real-input reduced layout: every axis but the last keeps all `n`
//! frequencies in FFT order (DC first), the last keeps `n/2 + 1`.
//!
//! The forward transform carries the `n^-d` normalization, so the DC
//! coefficient is the grid mean and the inverse is a plain sum.
//!
//! Nyquist lines: for even `n` the frequency `-pi n / l` has no signed
//! partner, so every derivative map uses a wave vector whose Nyquist
//! components are set to zero. This keeps the derivative operators odd in
//! `k` and their outputs real.

use std::f64::consts::PI;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_core::{
    curl_coefficient, div_coefficient_unchecked, inc_coefficient, ComplexMatrix3, ComplexVector3,
    WaveVector, C64,
};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Points per dimension (even).
    pub n_dis: usize,
    /// Cell side length.
    pub ell_u: f64,
    /// 2 (plane deformation, `k3 = 0`) or 3.
    pub spatial_dims: usize,
}

impl GridConfig {
    pub fn plane(n_dis: usize, ell_u: f64) -> Result<Self> {
        let cfg = GridConfig {
            n_dis,
            ell_u,
            spatial_dims: 2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_dis == 0 || !self.n_dis.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "n_dis must be even and positive, got {}",
                self.n_dis
            )));
        }
        if !(self.ell_u > 0.0 && self.ell_u.is_finite()) {
            return Err(Error::Config(format!(
                "ell_u must be > 0, got {}",
                self.ell_u
            )));
        }
        if self.spatial_dims != 2 && self.spatial_dims != 3 {
            return Err(Error::Config(format!(
                "spatial_dims must be 2 or 3, got {}",
                self.spatial_dims
            )));
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.n_dis.pow(self.spatial_dims as u32)
    }

    /// Length of the reduced (real-input) spectrum along the last axis.
    pub fn half(&self) -> usize {
        self.n_dis / 2 + 1
    }

    pub fn n_modes(&self) -> usize {
        self.n_dis.pow(self.spatial_dims as u32 - 1) * self.half()
    }

    /// Physical coordinate of grid index `i` along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.ell_u / self.n_dis as f64
    }

    /// Raw wavenumber of FFT index `j` along one axis. The Nyquist index
    /// maps to `-pi n / l`, so the per-axis set is
    /// `{2 pi (mu - 1)/l - pi n/l : mu = 1..n}`.
    pub fn axis_wavenumber(&self, j: usize) -> f64 {
        let n = self.n_dis as i64;
        let signed = if (j as i64) < n / 2 {
            j as i64
        } else {
            j as i64 - n
        };
        2.0 * PI * signed as f64 / self.ell_u
    }

    /// Wavenumber used by derivative maps: the raw value, except zero on
    /// the Nyquist index.
    pub fn derivative_wavenumber(&self, j: usize) -> f64 {
        if j == self.n_dis / 2 {
            0.0
        } else {
            self.axis_wavenumber(j)
        }
    }

    /// Per-axis multi-index of reduced-spectrum slot `idx`.
    pub fn mode_index(&self, idx: usize) -> [usize; 3] {
        let h = self.half();
        let n = self.n_dis;
        match self.spatial_dims {
            2 => [idx / h, idx % h, 0],
            _ => [idx / (n * h), (idx / h) % n, idx % h],
        }
    }

    fn wave_vector_with(&self, idx: usize, f: impl Fn(usize) -> f64) -> WaveVector {
        let m = self.mode_index(idx);
        match self.spatial_dims {
            2 => WaveVector::new(f(m[0]), f(m[1]), 0.0),
            _ => WaveVector::new(f(m[0]), f(m[1]), f(m[2])),
        }
    }

    /// Raw wave vector of reduced-spectrum slot `idx`.
    pub fn wave_vector(&self, idx: usize) -> WaveVector {
        self.wave_vector_with(idx, |j| self.axis_wavenumber(j))
    }

    /// Nyquist-zeroed wave vector of reduced-spectrum slot `idx`.
    pub fn derivative_wave_vector(&self, idx: usize) -> WaveVector {
        self.wave_vector_with(idx, |j| self.derivative_wavenumber(j))
    }

    /// Multiplicity of slot `idx` in the full spectrum (1 on the
    /// self-conjugate last-axis columns, 2 elsewhere).
    pub fn mode_weight(&self, idx: usize) -> f64 {
        let last = idx % self.half();
        if last == 0 || last == self.n_dis / 2 {
            1.0
        } else {
            2.0
        }
    }
}

/// Full reciprocal grid (all `n^d` wave vectors, raw wavenumbers, FFT order
/// along every axis).
pub fn build_reciprocal_grid(cfg: &GridConfig) -> Result<Vec<WaveVector>> {
    cfg.validate()?;
    let n = cfg.n_dis;
    let k: Vec<f64> = (0..n).map(|j| cfg.axis_wavenumber(j)).collect();
    let mut out = Vec::with_capacity(cfg.n_points());
    if cfg.spatial_dims == 2 {
        for a in &k {
            for b in &k {
                out.push(WaveVector::new(*a, *b, 0.0));
            }
        }
    } else {
        for a in &k {
            for b in &k {
                for c in &k {
                    out.push(WaveVector::new(*a, *b, *c));
                }
            }
        }
    }
    Ok(out)
}

/// Real second-order tensor field on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensorField {
    pub grid: GridConfig,
    pub data: Vec<Mat3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorField {
    pub grid: GridConfig,
    pub data: Vec<[f64; 3]>,
}

/// Complex tensor coefficients on the reduced reciprocal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTensorField {
    pub grid: GridConfig,
    pub data: Vec<ComplexMatrix3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    pub grid: GridConfig,
    pub data: Vec<ComplexVector3>,
}

impl RealTensorField {
    pub fn zeros(grid: GridConfig) -> Self {
        RealTensorField {
            grid,
            data: vec![[[0.0; 3]; 3]; grid.n_points()],
        }
    }

    pub fn constant(grid: GridConfig, value: Mat3) -> Self {
        RealTensorField {
            grid,
            data: vec![value; grid.n_points()],
        }
    }

    pub fn from_fn(grid: GridConfig, f: impl FnMut(usize) -> Mat3) -> Self {
        RealTensorField {
            grid,
            data: (0..grid.n_points()).map(f).collect(),
        }
    }

    pub fn component(&self, i: usize, j: usize) -> Vec<f64> {
        self.data.iter().map(|m| m[i][j]).collect()
    }

    /// `sqrt(sum_x |T(x)|^2)` over grid points.
    pub fn l2_norm(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &RealTensorField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().flatten().zip(b.iter().flatten()))
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    /// Structural zeros of the plane-deformation form (`13, 23, 31, 32`).
    pub fn is_plane_form(&self, tol: f64) -> bool {
        self.data.iter().all(|m| {
            m[0][2].abs() <= tol
                && m[1][2].abs() <= tol
                && m[2][0].abs() <= tol
                && m[2][1].abs() <= tol
        })
    }

    pub fn mean(&self) -> Mat3 {
        let mut acc = [[0.0; 3]; 3];
        for m in &self.data {
            for i in 0..3 {
                for j in 0..3 {
                    acc[i][j] += m[i][j];
                }
            }
        }
        let inv = 1.0 / self.data.len() as f64;
        acc.iter_mut().flatten().for_each(|v| *v *= inv);
        acc
    }

    pub fn add(&self, other: &RealTensorField) -> RealTensorField {
        RealTensorField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| {
                    let mut c = *a;
                    for i in 0..3 {
                        for j in 0..3 {
                            c[i][j] += b[i][j];
                        }
                    }
                    c
                })
                .collect(),
        }
    }
}

impl RealVectorField {
    pub fn zeros(grid: GridConfig) -> Self {
        RealVectorField {
            grid,
            data: vec![[0.0; 3]; grid.n_points()],
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .collect()
    }
}

/// Reusable FFT plans for one grid. Cheap to share across threads.
#[derive(Clone)]
pub struct SpectralGrid {
    cfg: GridConfig,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    dk: Vec<WaveVector>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("cfg", &self.cfg)
            .finish()
    }
}

impl SpectralGrid {
    pub fn new(cfg: GridConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_dis;
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        let dk = (0..cfg.n_modes())
            .map(|i| cfg.derivative_wave_vector(i))
            .collect();
        Ok(SpectralGrid {
            cfg,
            r2c: rp.plan_fft_forward(n),
            c2r: rp.plan_fft_inverse(n),
            fwd: cp.plan_fft_forward(n),
            inv: cp.plan_fft_inverse(n),
            dk,
        })
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    /// Nyquist-zeroed wave vectors, one per reduced-spectrum slot.
    pub fn derivative_wave_vectors(&self) -> &[WaveVector] {
        &self.dk
    }

    fn check_len(&self, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::shape(want, got));
        }
        Ok(())
    }

    /// Runs the complex transform along every axis except the last.
    fn complex_axes(&self, buf: &mut [C64], inverse: bool) {
        let n = self.cfg.n_dis;
        let h = self.cfg.half();
        let d = self.cfg.spatial_dims;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..d - 1 {
            let inner: usize = n.pow((d - 2 - axis) as u32) * h;
            let outer: usize = n.pow(axis as u32);
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * n * inner + i;
                    for (t, z) in line.iter_mut().enumerate() {
                        *z = buf[base + t * inner];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (t, z) in line.iter().enumerate() {
                        buf[base + t * inner] = *z;
                    }
                }
            }
        }
    }

    /// Normalized forward DFT of one real scalar field.
    pub fn forward_scalar(&self, f: &[f64]) -> Result<Vec<C64>> {
        self.check_len(f.len(), self.cfg.n_points())?;
        let n = self.cfg.n_dis;
        let h = self.cfg.half();
        let rows = self.cfg.n_points() / n;
        let mut out = vec![C64::new(0.0, 0.0); rows * h];
        let mut row_in = self.r2c.make_input_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for r in 0..rows {
            row_in.copy_from_slice(&f[r * n..(r + 1) * n]);
            self.r2c
                .process_with_scratch(&mut row_in, &mut out[r * h..(r + 1) * h], &mut scratch)
                .expect("buffer sizes fixed by plan");
        }
        self.complex_axes(&mut out, false);
        let scale = 1.0 / self.cfg.n_points() as f64;
        out.iter_mut().for_each(|z| *z *= scale);
        Ok(out)
    }

    /// Inverse DFT of one reduced spectrum. Returns the real field and the
    /// largest imaginary part discarded on the self-conjugate columns.
    pub fn inverse_scalar_with_residue(&self, spec: &[C64]) -> Result<(Vec<f64>, f64)> {
        self.check_len(spec.len(), self.cfg.n_modes())?;
        let n = self.cfg.n_dis;
        let h = self.cfg.half();
        let mut buf = spec.to_vec();
        self.complex_axes(&mut buf, true);
        let rows = buf.len() / h;
        let mut out = vec![0.0; self.cfg.n_points()];
        let mut scratch = self.c2r.make_scratch_vec();
        let mut residue = 0.0_f64;
        for r in 0..rows {
            let row = &mut buf[r * h..(r + 1) * h];
            residue = residue.max(row[0].im.abs()).max(row[h - 1].im.abs());
            row[0].im = 0.0;
            row[h - 1].im = 0.0;
            self.c2r
                .process_with_scratch(row, &mut out[r * n..(r + 1) * n], &mut scratch)
                .expect("buffer sizes fixed by plan");
        }
        Ok((out, residue))
    }

    pub fn inverse_scalar(&self, spec: &[C64]) -> Result<Vec<f64>> {
        self.inverse_scalar_with_residue(spec).map(|(f, _)| f)
    }

    pub fn dft_forward(&self, f: &RealTensorField) -> Result<SpectralTensorField> {
        self.check_grid(&f.grid)?;
        let mut data = vec![ComplexMatrix3::zero(); self.cfg.n_modes()];
        for i in 0..3 {
            for j in 0..3 {
                let spec = self.forward_scalar(&f.component(i, j))?;
                for (m, z) in data.iter_mut().zip(spec) {
                    m.0[i][j] = z;
                }
            }
        }
        Ok(SpectralTensorField {
            grid: self.cfg,
            data,
        })
    }

    /// Inverse DFT; also returns the largest discarded imaginary residue.
    pub fn dft_inverse_with_residue(
        &self,
        f: &SpectralTensorField,
    ) -> Result<(RealTensorField, f64)> {
        self.check_grid(&f.grid)?;
        let mut out = RealTensorField::zeros(self.cfg);
        let mut residue = 0.0_f64;
        let mut comp = vec![C64::new(0.0, 0.0); self.cfg.n_modes()];
        for i in 0..3 {
            for j in 0..3 {
                for (c, m) in comp.iter_mut().zip(&f.data) {
                    *c = m.0[i][j];
                }
                let (vals, r) = self.inverse_scalar_with_residue(&comp)?;
                residue = residue.max(r);
                for (o, v) in out.data.iter_mut().zip(vals) {
                    o[i][j] = v;
                }
            }
        }
        Ok((out, residue))
    }

    pub fn dft_inverse(&self, f: &SpectralTensorField) -> Result<RealTensorField> {
        self.dft_inverse_with_residue(f).map(|(r, _)| r)
    }

    pub fn dft_forward_vector(&self, f: &RealVectorField) -> Result<SpectralVectorField> {
        self.check_grid(&f.grid)?;
        let mut data = vec![ComplexVector3::zero(); self.cfg.n_modes()];
        for i in 0..3 {
            let comp: Vec<f64> = f.data.iter().map(|v| v[i]).collect();
            for (m, z) in data.iter_mut().zip(self.forward_scalar(&comp)?) {
                m.0[i] = z;
            }
        }
        Ok(SpectralVectorField {
            grid: self.cfg,
            data,
        })
    }

    pub fn dft_inverse_vector(&self, f: &SpectralVectorField) -> Result<RealVectorField> {
        self.check_grid(&f.grid)?;
        let mut out = RealVectorField::zeros(self.cfg);
        for i in 0..3 {
            let comp: Vec<C64> = f.data.iter().map(|v| v.0[i]).collect();
            for (o, v) in out.data.iter_mut().zip(self.inverse_scalar(&comp)?) {
                o[i] = v;
            }
        }
        Ok(out)
    }

    fn check_grid(&self, g: &GridConfig) -> Result<()> {
        if *g != self.cfg {
            return Err(Error::shape(format!("{:?}", self.cfg), format!("{g:?}")));
        }
        Ok(())
    }

    /// Applies a per-mode map to a tensor spectrum. The closure receives the
    /// slot index, the Nyquist-zeroed wave vector and whether the slot is the
    /// DC mode.
    pub fn map_modes<T, U>(
        &self,
        data: &[T],
        mut f: impl FnMut(usize, WaveVector, bool, &T) -> Result<U>,
    ) -> Result<Vec<U>> {
        data.iter()
            .enumerate()
            .map(|(idx, v)| f(idx, self.dk[idx], idx == 0, v))
            .collect()
    }

    /// `P = curl A`, with `P_bar = A_bar` on the mean.
    pub fn field_curl(&self, a: &RealTensorField) -> Result<RealTensorField> {
        let spec = self.dft_forward(a)?;
        let out = self.map_modes(&spec.data, |_, k, dc, m| {
            Ok(if dc {
                *m
            } else if k.is_zero() {
                ComplexMatrix3::zero()
            } else {
                curl_coefficient(m, k)
            })
        })?;
        self.dft_inverse(&SpectralTensorField {
            grid: self.cfg,
            data: out,
        })
    }

    /// `T = inc B` for a pointwise symmetric `B`, with `T_bar = B_bar`.
    pub fn field_inc(&self, b: &RealTensorField) -> Result<RealTensorField> {
        let spec = self.dft_forward(b)?;
        let out = self.map_modes(&spec.data, |_, k, dc, m| {
            if dc {
                inc_coefficient(m, crate::tensor_core::WaveVector::ZERO)
            } else if k.is_zero() {
                Ok(ComplexMatrix3::zero())
            } else {
                inc_coefficient(m, k)
            }
        })?;
        self.dft_inverse(&SpectralTensorField {
            grid: self.cfg,
            data: out,
        })
    }

    /// Spectral divergence coefficients `P (i k)`; zero on the mean and on
    /// modes whose derivative wave vector vanishes.
    pub fn div_spectrum(&self, p: &SpectralTensorField) -> Result<SpectralVectorField> {
        self.check_grid(&p.grid)?;
        let data = self.map_modes(&p.data, |_, k, dc, m| {
            Ok(if dc || k.is_zero() {
                ComplexVector3::zero()
            } else {
                div_coefficient_unchecked(m, k)
            })
        })?;
        Ok(SpectralVectorField {
            grid: self.cfg,
            data,
        })
    }

    /// `d = div P`, row-wise: `d_i = dP_ij / dx_j`.
    pub fn field_div(&self, p: &RealTensorField) -> Result<RealVectorField> {
        let spec = self.dft_forward(p)?;
        self.dft_inverse_vector(&self.div_spectrum(&spec)?)
    }

    /// Transpose of [`SpectralGrid::field_div`] as a linear map between
    /// real grid vectors: `<div P, g> = <P, div_adjoint(g)>` summed over
    /// grid points.
    pub fn div_adjoint(&self, g: &RealVectorField) -> Result<RealTensorField> {
        let spec = self.dft_forward_vector(g)?;
        let out = self.map_modes(&spec.data, |_, k, dc, v| {
            let mut m = ComplexMatrix3::zero();
            if !dc && !k.is_zero() {
                let ik = k.times_i();
                for i in 0..3 {
                    for j in 0..3 {
                        m.0[i][j] = v.0[i] * ik.0[j].conj();
                    }
                }
            }
            Ok(m)
        })?;
        self.dft_inverse(&SpectralTensorField {
            grid: self.cfg,
            data: out,
        })
    }

    /// `grad phi`, `(grad phi)_ij = d phi_i / dx_j`.
    pub fn field_grad(&self, phi: &RealVectorField) -> Result<RealTensorField> {
        let spec = self.dft_forward_vector(phi)?;
        let out = self.map_modes(&spec.data, |_, k, dc, v| {
            let mut m = ComplexMatrix3::zero();
            if !dc {
                let ik = k.times_i();
                for i in 0..3 {
                    for j in 0..3 {
                        m.0[i][j] = v.0[i] * ik.0[j];
                    }
                }
            }
            Ok(m)
        })?;
        self.dft_inverse(&SpectralTensorField {
            grid: self.cfg,
            data: out,
        })
    }

    /// Full-spectrum energy `sum_k |f_k|^2` of one component of a reduced
    /// spectrum.
    pub fn spectral_energy(&self, spec: &[C64]) -> f64 {
        spec.iter()
            .enumerate()
            .map(|(i, z)| self.cfg.mode_weight(i) * z.norm_sqr())
            .sum()
    }
}

/// Splits a field into its grid mean and zero-mean fluctuation.
pub fn mean_fluctuation_split(f: &RealTensorField) -> (Mat3, RealTensorField) {
    let mean = f.mean();
    let fluct = RealTensorField {
        grid: f.grid,
        data: f
            .data
            .iter()
            .map(|m| {
                let mut c = *m;
                for i in 0..3 {
                    for j in 0..3 {
                        c[i][j] -= mean[i][j];
                    }
                }
                c
            })
            .collect(),
    };
    (mean, fluct)
}

/// `||l_U div P||_2 / ||P||_2` over the grid (zero for a zero field).
pub fn relative_divergence(grid: &SpectralGrid, p: &RealTensorField) -> Result<f64> {
    let norm = p.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let d = grid.field_div(p)?;
    Ok(grid.config().ell_u * d.l2_norm() / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridConfig, rng: &mut impl Rng) -> RealTensorField {
        RealTensorField::from_fn(grid, |_| {
            let mut m = [[0.0; 3]; 3];
            m.iter_mut()
                .flatten()
                .for_each(|v| *v = rng.gen_range(-1.0..1.0));
            m
        })
    }

    fn random_field_seeded(grid: GridConfig, seed: u64) -> RealTensorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_field(grid, &mut rng)
    }

    #[test]
    fn reciprocal_grid_per_axis_values() {
        let cfg = GridConfig::plane(4, 1.0).unwrap();
        let mut ks: Vec<f64> = (0..4).map(|j| cfg.axis_wavenumber(j)).collect();
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [-4.0 * PI, -2.0 * PI, 0.0, 2.0 * PI];
        for (a, b) in ks.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }

        let cfg = GridConfig::plane(2, 2.0 * PI).unwrap();
        let mut ks: Vec<f64> = (0..2).map(|j| cfg.axis_wavenumber(j)).collect();
        ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ks[0] + 1.0).abs() < 1e-15 && ks[1] == 0.0);
    }

    #[test]
    fn reciprocal_grid_has_single_zero_mode() {
        for (n, d) in [(4, 2), (8, 2), (4, 3)] {
            let cfg = GridConfig {
                n_dis: n,
                ell_u: 1.3,
                spatial_dims: d,
            };
            let ks = build_reciprocal_grid(&cfg).unwrap();
            assert_eq!(ks.len(), cfg.n_points());
            assert_eq!(ks.iter().filter(|k| k.is_zero()).count(), 1);
        }
    }

    #[test]
    fn odd_grid_rejected() {
        assert!(GridConfig::plane(5, 1.0).is_err());
        assert!(GridConfig::plane(0, 1.0).is_err());
        assert!(GridConfig::plane(4, -1.0).is_err());
    }

    #[test]
    fn constant_field_has_only_dc() {
        let cfg = GridConfig::plane(8, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let c = [[1.0, 2.0, 0.0], [3.0, 4.0, 0.0], [0.0, 0.0, 5.0]];
        let spec = g.dft_forward(&RealTensorField::constant(cfg, c)).unwrap();
        assert!((spec.data[0] - ComplexMatrix3::from_real(&c)).frobenius() < 1e-14);
        assert!(spec.data[1..].iter().all(|m| m.frobenius() < 1e-14));
    }

    #[test]
    fn round_trip_2d_and_3d() {
        for cfg in [
            GridConfig::plane(16, 1.0).unwrap(),
            GridConfig {
                n_dis: 6,
                ell_u: 2.0,
                spatial_dims: 3,
            },
        ] {
            let g = SpectralGrid::new(cfg).unwrap();
            let f = random_field_seeded(cfg, 3);
            let (back, residue) = g
                .dft_inverse_with_residue(&g.dft_forward(&f).unwrap())
                .unwrap();
            assert!(back.max_abs_diff(&f) <= 1e-12);
            assert!(residue <= 1e-12);
        }
    }

    #[test]
    fn sampled_cosine_has_two_half_amplitude_modes() {
        let n = 8;
        let cfg = GridConfig::plane(n, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let amp = 3.0;
        let f: Vec<f64> = (0..n * n)
            .map(|p| amp * (2.0 * PI * cfg.coordinate(p / n)).cos())
            .collect();
        let spec = g.forward_scalar(&f).unwrap();
        // Along x1 (first axis), both +1 and -1 frequencies are stored.
        let h = cfg.half();
        let plus = spec[h];
        let minus = spec[(n - 1) * h];
        assert!((plus - C64::new(amp / 2.0, 0.0)).norm() < 1e-14);
        assert!((minus - plus.conj()).norm() < 1e-14);
        let others = spec
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != h && *i != (n - 1) * h)
            .all(|(_, z)| z.norm() < 1e-14);
        assert!(others);
    }

    #[test]
    fn parseval() {
        let cfg = GridConfig::plane(16, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let f = random_field_seeded(cfg, 4);
        let comp = f.component(1, 0);
        let mean_sq = comp.iter().map(|v| v * v).sum::<f64>() / comp.len() as f64;
        let spec = g.forward_scalar(&comp).unwrap();
        let e = g.spectral_energy(&spec);
        assert!((mean_sq - e).abs() <= 1e-12 * mean_sq);
    }

    #[test]
    fn mean_split() {
        let cfg = GridConfig::plane(8, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let c = [[1.0, 2.0, 0.0], [3.0, 4.0, 0.0], [0.0, 0.0, 5.0]];
        let (m, fl) = mean_fluctuation_split(&RealTensorField::constant(cfg, c));
        assert_eq!(m, c);
        assert!(fl.max_abs() < 1e-15);

        let f = random_field_seeded(cfg, 5);
        let (m, fl) = mean_fluctuation_split(&f);
        let oracle: f64 = f.data.iter().map(|x| x[2][1]).sum::<f64>() / 64.0;
        assert!((m[2][1] - oracle).abs() < 1e-15);
        assert!(fl.mean().iter().flatten().all(|v| v.abs() < 1e-15));
        let dc = g.dft_forward(&f).unwrap().data[0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((dc.0[i][j].re - m[i][j]).abs() < 1e-12);
            }
        }

        let (m2, fl2) = mean_fluctuation_split(&fl);
        assert!(m2.iter().flatten().all(|v| v.abs() < 1e-15));
        assert!(fl2.max_abs_diff(&fl) < 1e-15);
    }

    #[test]
    fn div_curl_vanishes_and_curl_keeps_mean() {
        for cfg in [
            GridConfig::plane(16, 1.0).unwrap(),
            GridConfig::plane(32, 0.7).unwrap(),
            GridConfig {
                n_dis: 8,
                ell_u: 1.0,
                spatial_dims: 3,
            },
        ] {
            let g = SpectralGrid::new(cfg).unwrap();
            let a = random_field_seeded(cfg, 6);
            let p = g.field_curl(&a).unwrap();
            let d = g.field_div(&p).unwrap();
            assert!(d.max_abs() <= 1e-11 * p.max_abs());
            let (pm, _) = mean_fluctuation_split(&p);
            let (am, _) = mean_fluctuation_split(&a);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((pm[i][j] - am[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn curl_of_constant_is_constant() {
        let cfg = GridConfig::plane(8, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let c = [[1.0, -2.0, 0.5], [3.0, 4.0, 0.0], [0.0, 7.0, 5.0]];
        let p = g.field_curl(&RealTensorField::constant(cfg, c)).unwrap();
        assert!(p.max_abs_diff(&RealTensorField::constant(cfg, c)) < 1e-13);
    }

    #[test]
    fn curl_of_single_mode_matches_closed_form() {
        // A_13(x) = sin(2 pi x2 / l): row 1 of curl A is (dA13/dx2, -dA13/dx1, ...).
        let n = 16;
        let l = 2.0;
        let cfg = GridConfig::plane(n, l).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let w = 2.0 * PI / l;
        let a = RealTensorField::from_fn(cfg, |p| {
            let x2 = cfg.coordinate(p % n);
            let mut m = [[0.0; 3]; 3];
            m[0][2] = (w * x2).sin();
            m
        });
        let p = g.field_curl(&a).unwrap();
        let expected = RealTensorField::from_fn(cfg, |q| {
            let x2 = cfg.coordinate(q % n);
            let mut m = [[0.0; 3]; 3];
            m[0][0] = w * (w * x2).cos();
            m
        });
        assert!(p.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn inc_of_symmetric_field() {
        let cfg = GridConfig::plane(16, 1.0).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let f = random_field_seeded(cfg, 7);
        let b = RealTensorField::from_fn(cfg, |p| {
            let m = f.data[p];
            let mut s = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    s[i][j] = 0.5 * (m[i][j] + m[j][i]);
                }
            }
            s
        });
        let t = g.field_inc(&b).unwrap();
        let scale = t.max_abs();
        for m in &t.data {
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m[i][j] - m[j][i]).abs() <= 1e-12 * scale);
                }
            }
        }
        assert!(g.field_div(&t).unwrap().max_abs() <= 1e-11 * scale);
        assert!(g.field_inc(&f).is_err());
    }

    #[test]
    fn div_adjoint_is_transpose() {
        let cfg = GridConfig::plane(8, 1.3).unwrap();
        let g = SpectralGrid::new(cfg).unwrap();
        let p = random_field_seeded(cfg, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = RealVectorField {
            grid: cfg,
            data: (0..64)
                .map(|_| {
                    [
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ]
                })
                .collect(),
        };
        let d = g.field_div(&p).unwrap();
        let lhs: f64 = d
            .data
            .iter()
            .flatten()
            .zip(v.data.iter().flatten())
            .map(|(a, b)| a * b)
            .sum();
        let at = g.div_adjoint(&v).unwrap();
        let rhs: f64 = p
            .data
            .iter()
            .flatten()
            .flatten()
            .zip(at.data.iter().flatten().flatten())
            .map(|(a, b)| a * b)
            .sum();
        assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = SpectralGrid::new(GridConfig::plane(8, 1.0).unwrap()).unwrap();
        let other = RealTensorField::zeros(GridConfig::plane(4, 1.0).unwrap());
        assert!(matches!(
            g.dft_forward(&other),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(g.forward_scalar(&[0.0; 3]).is_err());
    }
}
