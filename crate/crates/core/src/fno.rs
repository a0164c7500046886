//! Fourier neural operator with three stress heads.
//!
//! * `Pg`: the projected field is the (min-max normalized) stress.
//! * `Pi`: same network as `Pg`; only the training loss differs.
//! * `Pe`: the projected field is a stress potential. Its mean channels
//!   give the mean stress and the fluctuation is `curl` of the potential,
//!   so the output is divergence free for every parameter value.
//!
//! Architecture: `h_0 = W_inp i`, `h_{l+1} = GeLU(K_l * h_l + W_l h_l + b_l)`
//! for `l < depth`, `s = W_out h_depth`. The spectral convolution
//! `K * h = Re IFFT(K(k) FFT(h)(k))` keeps the signed frequencies with
//! `|f_1|, |f_2| < modes` and zero-fills the rest.
//!
//! Fields are stored channel-major: channel `c` of a `C x N` buffer is
//! `buf[c * N..(c + 1) * N]`, pixels in the grid layout of
//! [`crate::spectral_grid`].
//!
//! All parameters live in one flat `Vec<f64>`:
//! `W_inp (width x 11)`, then per layer `K (slots x width x width, complex
//! as re, im)`, `W (width x width)`, `b (width)`, then `W_out (rows x width)`
//! with `rows = 5` for `Pg`/`Pi` and `9` for `Pe`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalization::{NormalizationStats, ACTIVE_COMPONENTS};
use crate::spectral_grid::{GridConfig, Mat3, RealTensorField, SpectralGrid};
use crate::tensor_core::{curl_coefficient, ComplexMatrix3, C64};

pub const IN_CHANNELS: usize = 11;
pub const OUT_CHANNELS: usize = 9;
/// Potential channels `A13, A23, A31, A32` of the `Pe` head.
pub const POTENTIAL_CHANNELS: [usize; 4] = [2, 5, 6, 7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Pg,
    Pi,
    Pe,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Pg, Variant::Pi, Variant::Pe];

    fn out_rows(self) -> &'static [usize] {
        match self {
            Variant::Pe => &[0, 1, 2, 3, 4, 5, 6, 7, 8],
            _ => &ACTIVE_COMPONENTS,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Pg => "Pg",
            Variant::Pi => "Pi",
            Variant::Pe => "Pe",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pg" | "pgfno" => Ok(Variant::Pg),
            "pi" | "pifno" => Ok(Variant::Pi),
            "pe" | "pefno" => Ok(Variant::Pe),
            _ => Err(Error::Config(format!(
                "unknown variant `{s}` (expected Pg, Pi or Pe)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FnoConfig {
    pub n_dis: usize,
    pub ell_u: f64,
    /// Retained frequencies per dimension: `|f| < modes`. At most
    /// `n_dis / 2 + 1` (full spectrum).
    pub modes: usize,
    /// Hidden channel count.
    pub width: usize,
    /// Number of hidden Fourier layers.
    pub depth: usize,
}

impl FnoConfig {
    pub fn grid(&self) -> Result<GridConfig> {
        GridConfig::plane(self.n_dis, self.ell_u)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.modes == 0 || self.modes > self.n_dis / 2 + 1 {
            return Err(Error::Config(format!(
                "modes must lie in 1..={}, got {}",
                self.n_dis / 2 + 1,
                self.modes
            )));
        }
        if self.width == 0 || self.depth == 0 {
            return Err(Error::Config("width and depth must be positive".into()));
        }
        Ok(())
    }
}

/// Exact GeLU `x Phi(x)`.
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2))
}

/// `d/dx [x Phi(x)] = Phi(x) + x phi(x)`.
pub fn gelu_derivative(x: f64) -> f64 {
    let cdf = 0.5 * (1.0 + libm::erf(x * std::f64::consts::FRAC_1_SQRT_2));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    cdf + x * pdf
}

#[derive(Debug, Clone)]
struct Layout {
    w_inp: usize,
    /// Offsets of `(K, W, b)` per layer.
    layers: Vec<(usize, usize, usize)>,
    w_out: usize,
    total: usize,
}

/// Forward intermediates of one sample, consumed by [`Network::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    x: Vec<f64>,
    /// `h_0..h_depth`.
    h: Vec<Vec<f64>>,
    /// Pre-activations of each hidden layer.
    a: Vec<Vec<f64>>,
    /// Retained spectra of each hidden layer's input, `width x slots`.
    xs: Vec<Vec<C64>>,
}

/// Network architecture plus cached FFT plans. Parameters are passed
/// explicitly so one `Network` serves optimizers, finite-difference checks
/// and inference alike.
#[derive(Clone)]
pub struct Network {
    cfg: FnoConfig,
    variant: Variant,
    grid: SpectralGrid,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// Flat `i1 * n + i2` indices of retained modes in the full spectrum.
    slots: Vec<usize>,
    layout: Layout,
    /// `Pe` head: per reduced-spectrum mode, `curl` of each unit potential
    /// channel (empty on the mean and on Nyquist-only modes).
    pe_cols: Vec<Option<[ComplexMatrix3; 4]>>,
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Network")
            .field("cfg", &self.cfg)
            .field("variant", &self.variant)
            .field("n_params", &self.layout.total)
            .finish()
    }
}

fn unit(c: usize) -> ComplexMatrix3 {
    let mut m = ComplexMatrix3::zero();
    m.0[c / 3][c % 3] = C64::new(1.0, 0.0);
    m
}

impl Network {
    pub fn new(cfg: FnoConfig, variant: Variant) -> Result<Self> {
        cfg.validate()?;
        let gc = cfg.grid()?;
        let grid = SpectralGrid::new(gc)?;
        let n = cfg.n_dis;
        let mut planner = FftPlanner::<f64>::new();
        let retained: Vec<usize> = (0..n)
            .filter(|&j| {
                let signed = if j < n / 2 {
                    j as i64
                } else {
                    j as i64 - n as i64
                };
                signed.unsigned_abs() < cfg.modes as u64
            })
            .collect();
        let slots = retained
            .iter()
            .flat_map(|&a| retained.iter().map(move |&b| a * n + b))
            .collect::<Vec<_>>();

        let w = cfg.width;
        let mut off = 0;
        let w_inp = off;
        off += w * IN_CHANNELS;
        let mut layers = Vec::with_capacity(cfg.depth);
        for _ in 0..cfg.depth {
            let k = off;
            off += 2 * slots.len() * w * w;
            let wl = off;
            off += w * w;
            let b = off;
            off += w;
            layers.push((k, wl, b));
        }
        let w_out = off;
        off += variant.out_rows().len() * w;
        let layout = Layout {
            w_inp,
            layers,
            w_out,
            total: off,
        };

        let pe_cols = grid
            .derivative_wave_vectors()
            .iter()
            .enumerate()
            .map(|(idx, k)| {
                if idx == 0 || k.is_zero() {
                    None
                } else {
                    Some(POTENTIAL_CHANNELS.map(|c| curl_coefficient(&unit(c), *k)))
                }
            })
            .collect();

        Ok(Network {
            cfg,
            variant,
            grid,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
            slots,
            layout,
            pe_cols,
        })
    }

    pub fn config(&self) -> &FnoConfig {
        &self.cfg
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn n_params(&self) -> usize {
        self.layout.total
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    /// Named parameter blocks in storage order: `W_inp`, then `K_l`, `W_l`,
    /// `b_l` for every layer, then `W_out`.
    pub fn param_groups(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let l = &self.layout;
        let w = self.cfg.width;
        let mut out = vec![("W_inp".to_string(), l.w_inp..l.w_inp + w * IN_CHANNELS)];
        for (i, &(k, wl, b)) in l.layers.iter().enumerate() {
            out.push((format!("K_{i}"), k..wl));
            out.push((format!("W_{i}"), wl..b));
            out.push((format!("b_{i}"), b..b + w));
        }
        out.push(("W_out".to_string(), l.w_out..l.total));
        out
    }

    /// Same architecture with a different head. Hidden-layer parameters keep
    /// their offsets; only the `W_out` block size depends on the variant.
    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Network::new(self.cfg, variant)
    }

    /// Seeded initialization: matrices uniform in `+-1/sqrt(fan_in)`,
    /// biases likewise with `fan_in = width`, spectral kernels with real
    /// and imaginary parts uniform in `+-1/width^2`.
    pub fn init_params(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = self.cfg.width;
        let mut p = vec![0.0; self.layout.total];
        let fill = |dst: &mut [f64], bound: f64, rng: &mut ChaCha8Rng| {
            dst.iter_mut()
                .for_each(|v| *v = rng.gen_range(-bound..bound));
        };
        let l = &self.layout;
        fill(
            &mut p[l.w_inp..l.w_inp + w * IN_CHANNELS],
            1.0 / (IN_CHANNELS as f64).sqrt(),
            &mut rng,
        );
        let wb = 1.0 / (w as f64).sqrt();
        for &(k, wl, b) in &l.layers {
            fill(&mut p[k..wl], 1.0 / (w * w) as f64, &mut rng);
            fill(&mut p[wl..b], wb, &mut rng);
            fill(&mut p[b..b + w], wb, &mut rng);
        }
        let w_out = l.w_out;
        fill(&mut p[w_out..l.total], wb, &mut rng);
        p
    }

    fn n(&self) -> usize {
        self.cfg.n_dis * self.cfg.n_dis
    }

    /// Network input channels: normalized `E`, raw `nu`, nine load
    /// components broadcast over the grid.
    pub fn lift_input(
        &self,
        stats: &NormalizationStats,
        e: &[f64],
        nu: &[f64],
        f_bar: &Mat3,
    ) -> Result<Vec<f64>> {
        let n = self.n();
        if e.len() != n || nu.len() != n {
            return Err(Error::shape(n, e.len().min(nu.len())));
        }
        let mut x = Vec::with_capacity(IN_CHANNELS * n);
        x.extend(e.iter().map(|&v| stats.normalize_e(v)));
        x.extend_from_slice(nu);
        for c in 0..9 {
            let v = stats.normalize_f(c, f_bar[c / 3][c % 3]);
            x.extend(std::iter::repeat_n(v, n));
        }
        Ok(x)
    }

    /// `out[o] += sum_c m[o][c] inp[c]` for channel-major buffers.
    fn pointwise(m: &[f64], inp: &[f64], out: &mut [f64], n_in: usize, n: usize) {
        for (o, row) in out.chunks_mut(n).enumerate() {
            for c in 0..n_in {
                let w = m[o * n_in + c];
                if w != 0.0 {
                    row.iter_mut()
                        .zip(&inp[c * n..(c + 1) * n])
                        .for_each(|(r, v)| *r += w * v);
                }
            }
        }
    }

    fn fft2(&self, buf: &mut [C64], inverse: bool) {
        let n = self.cfg.n_dis;
        let plan = if inverse { &self.ifft } else { &self.fft };
        let mut scratch = vec![C64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, n);
        plan.process_with_scratch(buf, &mut scratch);
        transpose_square(buf, n);
    }

    /// Retained spectrum (unnormalized FFT) of every channel of `h`.
    fn retained_spectra(&self, h: &[f64], channels: usize) -> Vec<C64> {
        let n = self.n();
        let s = self.slots.len();
        let mut out = vec![C64::new(0.0, 0.0); channels * s];
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for c in 0..channels {
            for (b, v) in buf.iter_mut().zip(&h[c * n..(c + 1) * n]) {
                *b = C64::new(*v, 0.0);
            }
            self.fft2(&mut buf, false);
            for (dst, &slot) in out[c * s..(c + 1) * s].iter_mut().zip(&self.slots) {
                *dst = buf[slot];
            }
        }
        out
    }

    /// `out += Re IFFT(spec) / N` for a spectrum given on the retained slots.
    fn add_inverse(&self, spec: &[C64], out: &mut [f64]) {
        let n = self.n();
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for (&slot, z) in self.slots.iter().zip(spec) {
            buf[slot] = *z;
        }
        self.fft2(&mut buf, true);
        let inv = 1.0 / n as f64;
        out.iter_mut().zip(&buf).for_each(|(o, z)| *o += z.re * inv);
    }

    fn kernel(&self, params: &[f64], layer: usize, slot: usize, o: usize, c: usize) -> C64 {
        let w = self.cfg.width;
        let base = self.layout.layers[layer].0 + 2 * ((slot * w + o) * w + c);
        C64::new(params[base], params[base + 1])
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.layout.total {
            return Err(Error::shape(self.layout.total, params.len()));
        }
        Ok(())
    }

    /// Forward pass from lifted input channels to the projected field `s`
    /// (`9 x N`, channel-major; unused channels zero).
    pub fn forward_features(&self, params: &[f64], x: Vec<f64>) -> Result<(Vec<f64>, Tape)> {
        self.check_params(params)?;
        let n = self.n();
        if x.len() != IN_CHANNELS * n {
            return Err(Error::shape(IN_CHANNELS * n, x.len()));
        }
        let w = self.cfg.width;
        let s_len = self.slots.len();
        let l = &self.layout;

        let mut h0 = vec![0.0; w * n];
        Self::pointwise(&params[l.w_inp..], &x, &mut h0, IN_CHANNELS, n);
        let mut hs = vec![h0];
        let mut pre = Vec::with_capacity(self.cfg.depth);
        let mut specs = Vec::with_capacity(self.cfg.depth);
        for (li, &(_, wl, b)) in l.layers.iter().enumerate() {
            let h = hs.last().unwrap();
            let xs = self.retained_spectra(h, w);
            let mut a = vec![0.0; w * n];
            let mut y = vec![C64::new(0.0, 0.0); s_len];
            for o in 0..w {
                for (si, yv) in y.iter_mut().enumerate() {
                    *yv = (0..w)
                        .map(|c| self.kernel(params, li, si, o, c) * xs[c * s_len + si])
                        .sum();
                }
                self.add_inverse(&y, &mut a[o * n..(o + 1) * n]);
                a[o * n..(o + 1) * n]
                    .iter_mut()
                    .for_each(|v| *v += params[b + o]);
            }
            Self::pointwise(&params[wl..], h, &mut a, w, n);
            let next = a.iter().map(|&v| gelu(v)).collect();
            pre.push(a);
            specs.push(xs);
            hs.push(next);
        }

        let mut s = vec![0.0; OUT_CHANNELS * n];
        let h_last = hs.last().unwrap();
        for (r, &ch) in self.variant.out_rows().iter().enumerate() {
            let row = &params[l.w_out + r * w..l.w_out + (r + 1) * w];
            Self::pointwise(row, h_last, &mut s[ch * n..(ch + 1) * n], w, n);
        }
        Ok((
            s,
            Tape {
                x,
                h: hs,
                a: pre,
                xs: specs,
            },
        ))
    }

    /// Maps projected features to a physical stress field (MPa).
    pub fn output_transform(
        &self,
        stats: &NormalizationStats,
        s: &[f64],
    ) -> Result<RealTensorField> {
        let n = self.n();
        if s.len() != OUT_CHANNELS * n {
            return Err(Error::shape(OUT_CHANNELS * n, s.len()));
        }
        let gc = *self.grid.config();
        let mut p = RealTensorField::zeros(gc);
        match self.variant {
            Variant::Pg | Variant::Pi => {
                for c in ACTIVE_COMPONENTS {
                    let (lo, r) = (stats.p_min[c], stats.p_range(c));
                    for (px, v) in p.data.iter_mut().zip(&s[c * n..(c + 1) * n]) {
                        px[c / 3][c % 3] = lo + r * v;
                    }
                }
            }
            Variant::Pe => {
                let s_ref = stats.s_ref();
                let pot: Vec<Vec<C64>> = POTENTIAL_CHANNELS
                    .iter()
                    .map(|&c| self.grid.forward_scalar(&s[c * n..(c + 1) * n]))
                    .collect::<Result<_>>()?;
                let modes = gc.n_modes();
                for c in ACTIVE_COMPONENTS {
                    let (i, j) = (c / 3, c % 3);
                    let mut spec = vec![C64::new(0.0, 0.0); modes];
                    for (m, z) in spec.iter_mut().enumerate() {
                        if let Some(cols) = &self.pe_cols[m] {
                            *z = (0..4).map(|q| cols[q].0[i][j] * pot[q][m]).sum::<C64>() * s_ref;
                        }
                    }
                    let mean = s[c * n..(c + 1) * n].iter().sum::<f64>() / n as f64;
                    let bar = stats.p_min[c] + stats.p_range(c) * mean;
                    let fluct = self.grid.inverse_scalar(&spec)?;
                    for (px, v) in p.data.iter_mut().zip(fluct) {
                        px[i][j] = bar + v;
                    }
                }
            }
        }
        Ok(p)
    }

    /// Gradient of a scalar loss with respect to `s`, given its gradient with
    /// respect to the physical output stress.
    fn output_adjoint(
        &self,
        stats: &NormalizationStats,
        g_p: &RealTensorField,
    ) -> Result<Vec<f64>> {
        let n = self.n();
        let mut g_s = vec![0.0; OUT_CHANNELS * n];
        match self.variant {
            Variant::Pg | Variant::Pi => {
                for c in ACTIVE_COMPONENTS {
                    let r = stats.p_range(c);
                    for (g, px) in g_s[c * n..(c + 1) * n].iter_mut().zip(&g_p.data) {
                        *g = r * px[c / 3][c % 3];
                    }
                }
            }
            Variant::Pe => {
                let s_ref = stats.s_ref();
                let modes = self.grid.config().n_modes();
                let mut pot = vec![vec![C64::new(0.0, 0.0); modes]; 4];
                for c in ACTIVE_COMPONENTS {
                    let (i, j) = (c / 3, c % 3);
                    let comp: Vec<f64> = g_p.data.iter().map(|m| m[i][j]).collect();
                    let mean = comp.iter().sum::<f64>() / n as f64;
                    g_s[c * n..(c + 1) * n].fill(stats.p_range(c) * mean);
                    let spec = self.grid.forward_scalar(&comp)?;
                    for (m, z) in spec.iter().enumerate() {
                        if let Some(cols) = &self.pe_cols[m] {
                            for (q, acc) in pot.iter_mut().enumerate() {
                                acc[m] += cols[q].0[i][j].conj() * z * s_ref;
                            }
                        }
                    }
                }
                for (q, &c) in POTENTIAL_CHANNELS.iter().enumerate() {
                    let v = self.grid.inverse_scalar(&pot[q])?;
                    g_s[c * n..(c + 1) * n].copy_from_slice(&v);
                }
            }
        }
        Ok(g_s)
    }

    /// Full forward pass from raw sample fields to physical stress.
    pub fn forward(
        &self,
        params: &[f64],
        stats: &NormalizationStats,
        e: &[f64],
        nu: &[f64],
        f_bar: &Mat3,
    ) -> Result<(RealTensorField, Tape)> {
        let x = self.lift_input(stats, e, nu, f_bar)?;
        let (s, tape) = self.forward_features(params, x)?;
        Ok((self.output_transform(stats, &s)?, tape))
    }

    pub fn predict(
        &self,
        params: &[f64],
        stats: &NormalizationStats,
        e: &[f64],
        nu: &[f64],
        f_bar: &Mat3,
    ) -> Result<RealTensorField> {
        self.forward(params, stats, e, nu, f_bar).map(|(p, _)| p)
    }

    /// Reverse pass: accumulates `dL/dparams` into `grad` given
    /// `g_p = dL/dP` for the sample recorded in `tape`.
    pub fn backward(
        &self,
        params: &[f64],
        stats: &NormalizationStats,
        tape: &Tape,
        g_p: &RealTensorField,
        grad: &mut [f64],
    ) -> Result<()> {
        self.check_params(params)?;
        self.check_params(grad)?;
        let n = self.n();
        let w = self.cfg.width;
        let s_len = self.slots.len();
        let l = &self.layout;
        let g_s = self.output_adjoint(stats, g_p)?;

        // Projection.
        let h_last = tape.h.last().unwrap();
        let mut gh = vec![0.0; w * n];
        for (r, &ch) in self.variant.out_rows().iter().enumerate() {
            let gs = &g_s[ch * n..(ch + 1) * n];
            for c in 0..w {
                let hc = &h_last[c * n..(c + 1) * n];
                grad[l.w_out + r * w + c] += dot(gs, hc);
                let wv = params[l.w_out + r * w + c];
                gh[c * n..(c + 1) * n]
                    .iter_mut()
                    .zip(gs)
                    .for_each(|(g, v)| *g += wv * v);
            }
        }

        // Hidden layers.
        let inv_n = 1.0 / n as f64;
        for li in (0..self.cfg.depth).rev() {
            let (k_off, wl, b) = l.layers[li];
            let h_in = &tape.h[li];
            let ga: Vec<f64> = gh
                .iter()
                .zip(&tape.a[li])
                .map(|(g, a)| g * gelu_derivative(*a))
                .collect();
            let mut g_prev = vec![0.0; w * n];
            for o in 0..w {
                let gao = &ga[o * n..(o + 1) * n];
                grad[b + o] += gao.iter().sum::<f64>();
                for c in 0..w {
                    let hc = &h_in[c * n..(c + 1) * n];
                    grad[wl + o * w + c] += dot(gao, hc);
                    let wv = params[wl + o * w + c];
                    g_prev[c * n..(c + 1) * n]
                        .iter_mut()
                        .zip(gao)
                        .for_each(|(g, v)| *g += wv * v);
                }
            }
            let gs = self.retained_spectra(&ga, w);
            let xs = &tape.xs[li];
            for si in 0..s_len {
                for o in 0..w {
                    let go = gs[o * s_len + si];
                    for c in 0..w {
                        let gk = go * xs[c * s_len + si].conj() * inv_n;
                        let idx = k_off + 2 * ((si * w + o) * w + c);
                        grad[idx] += gk.re;
                        grad[idx + 1] += gk.im;
                    }
                }
            }
            let mut z = vec![C64::new(0.0, 0.0); s_len];
            for c in 0..w {
                for (si, zv) in z.iter_mut().enumerate() {
                    *zv = (0..w)
                        .map(|o| self.kernel(params, li, si, o, c).conj() * gs[o * s_len + si])
                        .sum();
                }
                self.add_inverse(&z, &mut g_prev[c * n..(c + 1) * n]);
            }
            gh = g_prev;
        }

        // Lifting.
        for o in 0..w {
            let go = &gh[o * n..(o + 1) * n];
            for c in 0..IN_CHANNELS {
                grad[l.w_inp + o * IN_CHANNELS + c] += dot(go, &tape.x[c * n..(c + 1) * n]);
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn transpose_square(buf: &mut [C64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
