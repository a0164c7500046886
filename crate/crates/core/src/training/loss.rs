//! Composite loss: relative data misfit plus mollified divergence norm.
//!
//! Over a set of samples `a` and pixels `b`:
//!
//! * `L_dat = sqrt(sum |P_out - P_dat|^2 / sum |P_dat|^2)` on min-max
//!   normalized stress,
//! * `L_div = sqrt(eps + sum |l_U d_out|^2)`, `d_out = div(P_out / s_ref)`,
//! * `L = L_dat + c_div L_div` for `Pi`, `L = L_dat` otherwise.
//!
//! Divergence is taken on the physical stress scaled by the single
//! constant `s_ref`, so an exactly divergence-free physical field has
//! `L_div = sqrt(eps)`. Per-component min-max scaling would not preserve
//! this.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fno::Variant;
use crate::normalization::NormalizationStats;
use crate::spectral_grid::{RealTensorField, RealVectorField, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub variant: Variant,
    pub c_div: f64,
    pub epsilon: f64,
}

impl LossConfig {
    pub fn new(variant: Variant, c_div: f64) -> Self {
        LossConfig {
            variant,
            c_div,
            epsilon: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_div >= 0.0 && self.c_div.is_finite()) {
            return Err(Error::Config(format!(
                "c_div must be >= 0, got {}",
                self.c_div
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be > 0".into()));
        }
        Ok(())
    }

    fn uses_div(&self) -> bool {
        self.variant == Variant::Pi && self.c_div > 0.0
    }
}

/// Per-sample sums from which set-level losses are assembled.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    pub misfit_sq: f64,
    pub data_sq: f64,
    pub div_sq: f64,
}

impl std::ops::Add for LossTerms {
    type Output = LossTerms;
    fn add(self, o: LossTerms) -> LossTerms {
        LossTerms {
            misfit_sq: self.misfit_sq + o.misfit_sq,
            data_sq: self.data_sq + o.data_sq,
            div_sq: self.div_sq + o.div_sq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_dat: f64,
    pub l_div: f64,
    pub l_total: f64,
}

/// Per-sample intermediates kept for the gradient.
#[derive(Debug, Clone)]
pub struct SampleLoss {
    pub terms: LossTerms,
    /// Normalized misfit `Pn_out - Pn_dat`.
    residual: RealTensorField,
    /// `d_out = div(P_out / s_ref)`.
    div: RealVectorField,
}

fn sum_sq<'a>(it: impl Iterator<Item = &'a f64>) -> f64 {
    it.map(|v| v * v).sum()
}

pub fn sample_loss(
    grid: &SpectralGrid,
    stats: &NormalizationStats,
    pred: &RealTensorField,
    data: &RealTensorField,
) -> Result<SampleLoss> {
    if pred.grid != data.grid {
        return Err(Error::shape(
            format!("{:?}", data.grid),
            format!("{:?}", pred.grid),
        ));
    }
    let residual = RealTensorField {
        grid: pred.grid,
        data: pred
            .data
            .iter()
            .zip(&data.data)
            .map(|(a, b)| {
                let (na, nb) = (stats.normalize_p(a), stats.normalize_p(b));
                let mut r = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        r[i][j] = na[i][j] - nb[i][j];
                    }
                }
                r
            })
            .collect(),
    };
    let data_sq: f64 = data
        .data
        .iter()
        .map(|m| sum_sq(stats.normalize_p(m).iter().flatten()))
        .sum();
    let s_ref = stats.s_ref();
    let mut div = grid.field_div(pred)?;
    div.data.iter_mut().flatten().for_each(|v| *v /= s_ref);
    let ell = grid.config().ell_u;
    Ok(SampleLoss {
        terms: LossTerms {
            misfit_sq: sum_sq(residual.data.iter().flatten().flatten()),
            data_sq,
            div_sq: ell * ell * sum_sq(div.data.iter().flatten()),
        },
        residual,
        div,
    })
}

pub fn combine(terms: LossTerms, cfg: &LossConfig) -> LossReport {
    let l_dat = if terms.data_sq > 0.0 {
        (terms.misfit_sq / terms.data_sq).sqrt()
    } else {
        terms.misfit_sq.sqrt()
    };
    let l_div = (cfg.epsilon + terms.div_sq).sqrt();
    let l_total = if cfg.variant == Variant::Pi {
        l_dat + cfg.c_div * l_div
    } else {
        l_dat
    };
    LossReport {
        l_dat,
        l_div,
        l_total,
    }
}

/// `dL_total / dP_out` for one sample, given the set totals.
pub fn sample_gradient(
    grid: &SpectralGrid,
    stats: &NormalizationStats,
    sample: &SampleLoss,
    totals: &LossTerms,
    report: &LossReport,
    cfg: &LossConfig,
) -> Result<RealTensorField> {
    let mut g = RealTensorField::zeros(sample.residual.grid);
    if report.l_dat > 0.0 {
        let denom = if totals.data_sq > 0.0 {
            totals.data_sq
        } else {
            1.0
        };
        let scale = 1.0 / (report.l_dat * denom);
        for (gm, r) in g.data.iter_mut().zip(&sample.residual.data) {
            for c in crate::normalization::ACTIVE_COMPONENTS {
                let (i, j) = (c / 3, c % 3);
                gm[i][j] = scale * r[i][j] / stats.p_range(c);
            }
        }
    }
    if cfg.uses_div() {
        let ell = grid.config().ell_u;
        let scale = cfg.c_div * ell * ell / (report.l_div * stats.s_ref());
        let adj = grid.div_adjoint(&sample.div)?;
        for (gm, a) in g.data.iter_mut().zip(&adj.data) {
            for i in 0..3 {
                for j in 0..3 {
                    gm[i][j] += scale * a[i][j];
                }
            }
        }
    }
    Ok(g)
}
