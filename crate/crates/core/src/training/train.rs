//! The Adam training loop.
//!
//! One step: forward every batch sample (parallel), reduce the loss sums in
//! index order, then back-propagate in a fixed number of contiguous chunks
//! (parallel) whose gradients are summed in chunk order. The chunking does
//! not depend on the thread count, so trajectories are bit-identical for
//! either execution policy.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fno::Tape;
use crate::spectral_grid::RealTensorField;

use super::adam::learning_rate;
use super::dataset::{Dataset, Sample};
use super::loss::{combine, sample_gradient, sample_loss, LossReport, LossTerms, SampleLoss};
use super::model::FnoModel;

/// Gradient chunks per step.
const GRAD_CHUNKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Total epoch budget (training resumes from the model's epoch).
    pub epochs: usize,
    pub lr0: f64,
    /// Mini-batch size; `None` uses the whole training split.
    pub batch_size: Option<usize>,
    /// Stop once the model reaches this epoch, keeping the learning-rate
    /// schedule of the full budget; a later call resumes from there.
    pub stop_at: Option<usize>,
}

impl TrainConfig {
    /// Full-batch training for `epochs` epochs.
    pub fn new(epochs: usize, lr0: f64) -> Self {
        TrainConfig {
            epochs,
            lr0,
            batch_size: None,
            stop_at: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::Config(format!("lr0 must be > 0, got {}", self.lr0)));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// One-based epoch number.
    pub epoch: usize,
    pub lr: f64,
    pub train_l_dat: f64,
    pub train_l_div: f64,
    pub test_l_dat: f64,
    pub test_l_div: f64,
}

struct Forward {
    tape: Tape,
    loss: SampleLoss,
}

fn forward_sample(model: &FnoModel, s: &Sample) -> Result<(RealTensorField, Tape)> {
    model
        .network
        .forward(&model.params, &model.stats, &s.e, &s.nu, &s.f_bar)
}

/// Set-level losses of `samples` under the model's loss configuration.
pub fn evaluate_losses(model: &FnoModel, samples: &[Sample], exec: Exec) -> Result<LossReport> {
    let grid = model.network.grid();
    let terms = exec.try_map(samples.len(), |i| {
        let pred = model.predict(&samples[i].e, &samples[i].nu, &samples[i].f_bar)?;
        sample_loss(grid, &model.stats, &pred, &samples[i].p).map(|l| l.terms)
    })?;
    let total = terms.into_iter().fold(LossTerms::default(), |a, b| a + b);
    Ok(combine(total, &model.loss))
}

/// Loss and gradient of the batch `idx` at the current parameters.
pub fn loss_and_gradient(
    model: &FnoModel,
    samples: &[Sample],
    idx: &[usize],
    exec: Exec,
) -> Result<(LossReport, Vec<f64>)> {
    let grid = model.network.grid();
    let fwd = exec.try_map(idx.len(), |b| {
        let s = &samples[idx[b]];
        let (pred, tape) = forward_sample(model, s)?;
        let loss = sample_loss(grid, &model.stats, &pred, &s.p)?;
        Ok::<_, Error>(Forward { tape, loss })
    })?;
    let totals = fwd
        .iter()
        .fold(LossTerms::default(), |a, f| a + f.loss.terms);
    let report = combine(totals, &model.loss);
    let n_params = model.params.len();
    let chunks = GRAD_CHUNKS.min(fwd.len()).max(1);
    let partial = exec.try_map(chunks, |k| {
        let lo = k * fwd.len() / chunks;
        let hi = (k + 1) * fwd.len() / chunks;
        let mut grad = vec![0.0; n_params];
        for f in &fwd[lo..hi] {
            let g_p = sample_gradient(grid, &model.stats, &f.loss, &totals, &report, &model.loss)?;
            model
                .network
                .backward(&model.params, &model.stats, &f.tape, &g_p, &mut grad)?;
        }
        Ok::<_, Error>(grad)
    })?;
    let mut grad = vec![0.0; n_params];
    for part in partial {
        grad.iter_mut().zip(part).for_each(|(g, p)| *g += p);
    }
    Ok((report, grad))
}

/// Trains until `model.epoch == cfg.epochs`, recording losses after every
/// epoch. `on_epoch` sees each record as it is produced.
pub fn train(
    model: &mut FnoModel,
    ds: &Dataset,
    cfg: &TrainConfig,
    exec: Exec,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<Vec<EpochRecord>> {
    cfg.validate()?;
    let grid = ds.config.grid()?;
    if grid != *model.network.grid().config() {
        return Err(Error::Mismatch(format!(
            "dataset grid {:?} differs from model grid {:?}",
            grid,
            model.network.grid().config()
        )));
    }
    let train = ds.train();
    if train.is_empty() {
        return Err(Error::Precondition("training split is empty".into()));
    }
    let batch = cfg.batch_size.unwrap_or(train.len()).min(train.len());
    let mut history = Vec::new();
    let last = cfg.stop_at.map_or(cfg.epochs, |s| s.min(cfg.epochs));
    while model.epoch < last {
        let epoch = model.epoch;
        let lr = learning_rate(cfg.lr0, epoch, cfg.epochs);
        let mut order: Vec<usize> = (0..train.len()).collect();
        if batch < train.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            rng.set_stream(epoch as u64 + 1);
            order.shuffle(&mut rng);
        }
        for idx in order.chunks(batch) {
            let (report, grad) = loss_and_gradient(model, train, idx, exec)?;
            if !report.l_total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
            }
            model.adam.step(&mut model.params, &grad, lr);
        }
        model.epoch += 1;
        let tr = evaluate_losses(model, train, exec)?;
        let te = if ds.test().is_empty() {
            LossReport {
                l_dat: f64::NAN,
                l_div: f64::NAN,
                l_total: f64::NAN,
            }
        } else {
            evaluate_losses(model, ds.test(), exec)?
        };
        if !tr.l_total.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: model.epoch });
        }
        let rec = EpochRecord {
            epoch: model.epoch,
            lr,
            train_l_dat: tr.l_dat,
            train_l_div: tr.l_div,
            test_l_dat: te.l_dat,
            test_l_div: te.l_div,
        };
        on_epoch(&rec);
        history.push(rec);
    }
    Ok(history)
}

/// Writes `epoch,lr,train_L_dat,train_L_div,test_L_dat,test_L_div`.
pub fn write_history_csv(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "epoch,lr,train_L_dat,train_L_div,test_L_dat,test_L_div"
    )?;
    for r in history {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e}",
            r.epoch, r.lr, r.train_l_dat, r.train_l_div, r.test_l_dat, r.test_l_div
        )?;
    }
    out.flush()?;
    Ok(())
}
