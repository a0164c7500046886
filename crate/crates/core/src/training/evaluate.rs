//! Error and divergence metrics of a model on a set of samples.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Exec;
use crate::fno::Variant;
use crate::spectral_grid::RealTensorField;

use super::dataset::Sample;
use super::loss::{combine, sample_loss, LossReport, LossTerms};
use super::model::FnoModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub index: usize,
    /// Relative normalized misfit of this sample alone.
    pub l_dat: f64,
    /// `||l_U div P_out|| / ||P_out||`.
    pub rel_div: f64,
    /// Largest pixel error `|P_out - P_dat|` (MPa).
    pub max_err: f64,
    pub median_err: f64,
    /// Pixel index of `max_err`.
    pub argmax_err: usize,
    /// Mean of `|P_ij|` over pixels, prediction and data (row-major).
    pub mean_abs_pred: [f64; 9],
    pub mean_abs_data: [f64; 9],
    /// Per-pixel `|P_out - P_dat|` (MPa).
    #[serde(skip)]
    pub err_map: Vec<f64>,
    /// Per-pixel `|l_U div P_out|` (MPa).
    #[serde(skip)]
    pub div_map: Vec<f64>,
    #[serde(skip)]
    pub prediction: Option<RealTensorField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: Variant,
    /// Set-level losses under the model's loss configuration.
    pub losses: LossReport,
    /// `||l_U div P_out|| / ||P_out||` over all samples.
    pub rel_div: f64,
    pub samples: Vec<SampleMetrics>,
}

fn mean_abs(p: &RealTensorField) -> [f64; 9] {
    let mut acc = [0.0; 9];
    for m in &p.data {
        for c in 0..9 {
            acc[c] += m[c / 3][c % 3].abs();
        }
    }
    acc.map(|v| v / p.data.len() as f64)
}

/// Evaluates `model` on `samples`. `keep_predictions` retains the predicted
/// fields in the report.
pub fn evaluate(
    model: &FnoModel,
    samples: &[Sample],
    exec: Exec,
    keep_predictions: bool,
) -> Result<EvalReport> {
    let grid = model.network.grid();
    let ell = grid.config().ell_u;
    let per = exec.try_map(samples.len(), |i| {
        let s = &samples[i];
        let pred = model.predict(&s.e, &s.nu, &s.f_bar)?;
        let loss = sample_loss(grid, &model.stats, &pred, &s.p)?;
        let d = grid.field_div(&pred)?;
        let div_map: Vec<f64> = d.magnitude().into_iter().map(|v| ell * v).collect();
        let div_sq: f64 = div_map.iter().map(|v| v * v).sum();
        let p_sq: f64 = pred.l2_norm().powi(2);
        let err_map: Vec<f64> = pred
            .data
            .iter()
            .zip(&s.p.data)
            .map(|(a, b)| {
                a.iter()
                    .flatten()
                    .zip(b.iter().flatten())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let (argmax_err, max_err) =
            err_map
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |m, (i, &v)| if v > m.1 { (i, v) } else { m },
                );
        let mut sorted = err_map.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median_err = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2]
        } else {
            0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
        };
        let metrics = SampleMetrics {
            index: s.index,
            l_dat: combine(loss.terms, &model.loss).l_dat,
            rel_div: if p_sq > 0.0 {
                (div_sq / p_sq).sqrt()
            } else {
                0.0
            },
            max_err,
            median_err,
            argmax_err,
            mean_abs_pred: mean_abs(&pred),
            mean_abs_data: mean_abs(&s.p),
            err_map,
            div_map,
            prediction: keep_predictions.then_some(pred),
        };
        Ok::<_, crate::Error>((loss.terms, div_sq, p_sq, metrics))
    })?;
    let mut terms = LossTerms::default();
    let (mut div_sq, mut p_sq) = (0.0, 0.0);
    let mut out = Vec::with_capacity(per.len());
    for (t, d, p, m) in per {
        terms = terms + t;
        div_sq += d;
        p_sq += p;
        out.push(m);
    }
    Ok(EvalReport {
        variant: model.variant(),
        losses: combine(terms, &model.loss),
        rel_div: if p_sq > 0.0 {
            (div_sq / p_sq).sqrt()
        } else {
            0.0
        },
        samples: out,
    })
}
