//! Fixed-point spectral solver for periodic finite-strain equilibrium with
//! a Saint Venant-Kirchhoff material.
//!
//! Unknown: the displacement-gradient fluctuation `H = F - F_bar`. Each
//! iteration evaluates the first Piola-Kirchhoff stress pointwise, moves to
//! Fourier space and applies the Green operator of an isotropic linear
//! reference medium:
//!
//! `H(xi) <- H(xi) - N^-1(xi) (P(xi) xi) (x) xi` with
//! `N^-1 = [I - (lam0 + mu0)/(lam0 + 2 mu0) xi (x) xi / |xi|^2] / (mu0 |xi|^2)`.
//!
//! `xi` is the Nyquist-zeroed wave vector used by
//! [`SpectralGrid::field_div`], so the converged field is divergence free
//! under exactly the operator used to measure the residual. Moduli are
//! stored in GPa; stresses are returned in MPa.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_grid::{Mat3, RealTensorField, SpectralGrid};
use crate::tensor_core::{ComplexMatrix3, C64};

/// GPa to MPa.
pub const STRESS_UNIT: f64 = 1000.0;

/// How the reference Lame constants are derived from the pixel moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ReferenceModulusRule {
    /// `(min + max) / 2` of each Lame constant. Gives a contraction for any
    /// contrast in the small-strain regime.
    #[default]
    MinMaxMidpoint,
    /// Volume average of each Lame constant.
    ArithmeticMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when `rms(l_U |div P|) / |P_bar|_F <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub reference: ReferenceModulusRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 500,
            reference: ReferenceModulusRule::MinMaxMidpoint,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub f: RealTensorField,
    /// First Piola-Kirchhoff stress in MPa.
    pub p: RealTensorField,
    pub iterations: usize,
    pub residual: f64,
}

/// Lame constants `(lambda, mu)` in the units of `e`.
pub fn lame(e: f64, nu: f64) -> (f64, f64) {
    (
        e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        e / (2.0 * (1.0 + nu)),
    )
}

/// Saint Venant-Kirchhoff first Piola-Kirchhoff stress
/// `P = lambda tr(E) F + 2 mu F E`, `E = (F^T F - I)/2`, in MPa for `e` in GPa.
pub fn svk_stress(f: &Mat3, e: f64, nu: f64) -> Mat3 {
    let (lam, mu) = lame(e * STRESS_UNIT, nu);
    let mut green = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += f[k][i] * f[k][j];
            }
            green[i][j] = 0.5 * (s - if i == j { 1.0 } else { 0.0 });
        }
    }
    let tr = green[0][0] + green[1][1] + green[2][2];
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut fe = 0.0;
            for k in 0..3 {
                fe += f[i][k] * green[k][j];
            }
            p[i][j] = lam * tr * f[i][j] + 2.0 * mu * fe;
        }
    }
    p
}

fn reference_lame(e: &[f64], nu: &[f64], rule: ReferenceModulusRule) -> (f64, f64) {
    let pairs = e.iter().zip(nu).map(|(&e, &nu)| lame(e * STRESS_UNIT, nu));
    match rule {
        ReferenceModulusRule::MinMaxMidpoint => {
            let (mut lmin, mut lmax, mut mmin, mut mmax) = (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            );
            for (l, m) in pairs {
                lmin = lmin.min(l);
                lmax = lmax.max(l);
                mmin = mmin.min(m);
                mmax = mmax.max(m);
            }
            (0.5 * (lmin + lmax), 0.5 * (mmin + mmax))
        }
        ReferenceModulusRule::ArithmeticMean => {
            let n = e.len() as f64;
            let (sl, sm) = pairs.fold((0.0, 0.0), |(a, b), (l, m)| (a + l, b + m));
            (sl / n, sm / n)
        }
    }
}

/// Relative equilibrium residual `rms(l_U |div P|) / |P_bar|_F` evaluated
/// from a stress spectrum.
pub fn spectral_residual(grid: &SpectralGrid, p_hat: &[ComplexMatrix3]) -> f64 {
    let cfg = grid.config();
    let dk = grid.derivative_wave_vectors();
    let mut energy = 0.0;
    for (idx, (m, k)) in p_hat.iter().zip(dk).enumerate().skip(1) {
        if k.is_zero() {
            continue;
        }
        let kv = k.as_array();
        let mut s = 0.0;
        for row in &m.0 {
            let d: C64 = row.iter().zip(kv).map(|(a, b)| a * b).sum();
            s += d.norm_sqr();
        }
        energy += cfg.mode_weight(idx) * s;
    }
    let mean = p_hat[0].real();
    let norm = mean.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let num = cfg.ell_u * energy.sqrt();
    if norm == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / norm
    }
}

/// Solves for the periodic equilibrium state under mean deformation
/// gradient `f_bar`.
pub fn solve_equilibrium(
    grid: &SpectralGrid,
    e: &[f64],
    nu: &[f64],
    f_bar: Mat3,
    cfg: &SolverConfig,
) -> Result<Equilibrium> {
    let gc = *grid.config();
    if e.len() != gc.n_points() || nu.len() != gc.n_points() {
        return Err(Error::shape(gc.n_points(), e.len().min(nu.len())));
    }
    if !(cfg.tol > 0.0) || cfg.max_iter == 0 {
        return Err(Error::Config(
            "solver tol must be > 0 and max_iter >= 1".into(),
        ));
    }
    if e.iter().chain(nu).any(|v| !v.is_finite()) || e.iter().any(|&v| v <= 0.0) {
        return Err(Error::Precondition(
            "moduli must be finite and positive".into(),
        ));
    }
    let (lam0, mu0) = reference_lame(e, nu, cfg.reference);
    let c_ratio = (lam0 + mu0) / (lam0 + 2.0 * mu0);
    let dk = grid.derivative_wave_vectors().to_vec();

    let mut f = RealTensorField::constant(gc, f_bar);
    let mut residual = f64::INFINITY;
    for it in 0..=cfg.max_iter {
        let p = RealTensorField {
            grid: gc,
            data: f
                .data
                .iter()
                .zip(e.iter().zip(nu))
                .map(|(fx, (&ex, &nx))| svk_stress(fx, ex, nx))
                .collect(),
        };
        let p_hat = grid.dft_forward(&p)?;
        residual = spectral_residual(grid, &p_hat.data);
        if !residual.is_finite() {
            return Err(Error::NotConverged {
                iterations: it,
                residual,
            });
        }
        if residual <= cfg.tol {
            return Ok(Equilibrium {
                f,
                p,
                iterations: it,
                residual,
            });
        }
        if it == cfg.max_iter {
            break;
        }
        let mut f_hat = grid.dft_forward(&f)?;
        for (idx, (fm, pm)) in f_hat.data.iter_mut().zip(&p_hat.data).enumerate() {
            let k = dk[idx];
            if idx == 0 || k.is_zero() {
                continue;
            }
            let xi = k.as_array();
            let k2 = k.norm_sqr();
            let mut pxi = [C64::new(0.0, 0.0); 3];
            for (i, row) in pm.0.iter().enumerate() {
                pxi[i] = row.iter().zip(xi).map(|(a, b)| a * b).sum();
            }
            let xi_dot: C64 = pxi.iter().zip(xi).map(|(a, b)| a * b).sum();
            for i in 0..3 {
                let u = (pxi[i] - xi_dot * (c_ratio * xi[i] / k2)) / (mu0 * k2);
                for j in 0..3 {
                    fm.0[i][j] -= u * xi[j];
                }
            }
        }
        f = grid.dft_inverse(&f_hat)?;
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::GridConfig;

    fn diag(a: f64, b: f64, c: f64) -> Mat3 {
        [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
    }

    #[test]
    fn svk_zero_at_identity_and_linear_limit() {
        let p = svk_stress(&diag(1.0, 1.0, 1.0), 100.0, 0.3);
        assert!(p.iter().flatten().all(|v| v.abs() < 1e-12));
        // Small uniaxial stretch: P11 ~ (lambda + 2 mu) eps.
        let eps = 1e-7;
        let p = svk_stress(&diag(1.0 + eps, 1.0, 1.0), 100.0, 0.3);
        let (l, m) = lame(100.0e3, 0.3);
        assert!((p[0][0] / eps - (l + 2.0 * m)).abs() / (l + 2.0 * m) < 1e-5);
        assert!((p[1][1] / eps - l).abs() / l < 1e-5);
    }

    #[test]
    fn homogeneous_converges_immediately() {
        let g = SpectralGrid::new(GridConfig::plane(8, 1.0).unwrap()).unwrap();
        let n = 64;
        let fb = diag(1.0, 1.002, 1.0);
        let sol = solve_equilibrium(
            &g,
            &vec![120.0; n],
            &vec![0.3; n],
            fb,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(sol.iterations, 0);
        let want = svk_stress(&fb, 120.0, 0.3);
        assert!(sol.p.data.iter().all(|p| p == &want));
    }

    #[test]
    fn bilayer_converges_with_continuous_traction() {
        let n = 8;
        let g = SpectralGrid::new(GridConfig::plane(n, 1.0).unwrap()).unwrap();
        let e: Vec<f64> = (0..n * n)
            .map(|p| if p / n < 4 { 60.0 } else { 180.0 })
            .collect();
        let nu = vec![0.3; n * n];
        let sol = solve_equilibrium(&g, &e, &nu, diag(1.0, 1.004, 1.0), &SolverConfig::default())
            .unwrap();
        assert!(sol.residual <= 1e-8);
        let p11: Vec<f64> = sol.p.data.iter().map(|p| p[0][0]).collect();
        let spread = p11.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - p11.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 1e-6 * p11[0].abs());
        let mean_f = sol.f.mean();
        assert!((mean_f[0][0] - 1.0).abs() < 1e-12);
        assert!((mean_f[1][1] - 1.004).abs() < 1e-12);
    }

    #[test]
    fn not_converged_reported() {
        let n = 8;
        let g = SpectralGrid::new(GridConfig::plane(n, 1.0).unwrap()).unwrap();
        let e: Vec<f64> = (0..n * n)
            .map(|p| if p / n < 4 { 60.0 } else { 180.0 })
            .collect();
        let cfg = SolverConfig {
            max_iter: 1,
            ..Default::default()
        };
        let r = solve_equilibrium(&g, &e, &vec![0.3; n * n], diag(1.0, 1.004, 1.0), &cfg);
        assert!(matches!(r, Err(Error::NotConverged { iterations: 1, .. })));
    }

    #[test]
    fn rejects_bad_input() {
        let g = SpectralGrid::new(GridConfig::plane(4, 1.0).unwrap()).unwrap();
        let fb = diag(1.0, 1.0, 1.0);
        let cfg = SolverConfig::default();
        assert!(solve_equilibrium(&g, &[1.0; 3], &[0.3; 3], fb, &cfg).is_err());
        assert!(solve_equilibrium(&g, &[-1.0; 16], &[0.3; 16], fb, &cfg).is_err());
    }
}
