use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::WindowedSet;
use super::metrics::mae_rmse;
use crate::cells::StackedRnn;
use crate::diffcore::{Adam, AdamConfig, Tape, Tensor, Var};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Mean of the mini-batch losses seen during the epoch.
    pub train_loss: f64,
    pub train_mae: f64,
    pub train_rmse: f64,
    pub test_mae: f64,
    pub test_rmse: f64,
}

/// Per-epoch metrics in normalized latent space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub epochs: Vec<EpochMetrics>,
    /// Seconds per epoch. Not part of any deterministic output.
    pub wall_clock: Vec<f64>,
}

pub const CSV_HEADER: &str = "epoch,train_mae,train_rmse,test_mae,test_rmse";

impl MetricReport {
    pub fn final_test(&self) -> Option<(f64, f64)> {
        self.epochs.last().map(|e| (e.test_mae, e.test_rmse))
    }

    /// Header plus one row per epoch, values at round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for e in &self.epochs {
            s.push_str(&format!(
                "{},{:?},{:?},{:?},{:?}\n",
                e.epoch, e.train_mae, e.train_rmse, e.test_mae, e.test_rmse
            ));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainSettings {
    pub epochs: usize,
    pub adam: AdamConfig,
    pub batch_size: usize,
    pub seed: u64,
}

/// Latent predictions for every window of `set`.
pub fn predict_set(model: &StackedRnn, set: &WindowedSet) -> Result<Vec<Vec<f64>>> {
    set.inputs.iter().map(|xs| model.predict(xs)).collect()
}

fn batch_loss<'t>(
    model: &StackedRnn,
    tape: &'t Tape,
    params: &[Var<'t>],
    set: &WindowedSet,
    ids: &[usize],
) -> Result<Var<'t>> {
    let mut total: Option<Var<'t>> = None;
    for &i in ids {
        let xs: Vec<Var> = set.inputs[i]
            .iter()
            .map(|x| tape.leaf(Tensor::vector(x)))
            .collect();
        let y = model.run_var(params, &xs)?;
        let l = y.mse(&tape.leaf(Tensor::vector(&set.targets[i])))?;
        total = Some(match total {
            Some(t) => t.add(&l)?,
            None => l,
        });
    }
    total
        .expect("non-empty batch")
        .scale(1.0 / ids.len() as f64)
}

/// Adam on the latent-space MSE of one-step-ahead predictions. Train and
/// test metrics are measured after each epoch's updates.
pub fn train_model(
    model: &mut StackedRnn,
    train: &WindowedSet,
    test: &WindowedSet,
    settings: &TrainSettings,
) -> Result<MetricReport> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::contract("training and test sets must be non-empty"));
    }
    if settings.batch_size == 0 {
        return Err(Error::config("batch size must be positive"));
    }
    let mut adam = Adam::new(settings.adam, model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut report = MetricReport::default();

    for epoch in 1..=settings.epochs {
        let at_epoch = |e: Error| match e {
            Error::Divergence(m) => Error::Divergence(format!("epoch {epoch}: {m}")),
            other => other,
        };
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for ids in order.chunks(settings.batch_size) {
            let tape = Tape::new();
            let params = model.bind(&tape);
            let loss = batch_loss(model, &tape, &params, train, ids).map_err(at_epoch)?;
            let value = loss.value().item();
            if !value.is_finite() {
                return Err(Error::Divergence(format!(
                    "training loss is {value} in epoch {epoch}"
                )));
            }
            loss_sum += value * ids.len() as f64;
            let grads = tape.backward(loss).map_err(at_epoch)?.wrt_all(&params);
            adam.step(&mut model.params_mut(), &grads)?;
        }
        let (train_mae, train_rmse) = mae_rmse(
            &train.targets,
            &predict_set(model, train).map_err(at_epoch)?,
        )?;
        let (test_mae, test_rmse) =
            mae_rmse(&test.targets, &predict_set(model, test).map_err(at_epoch)?)?;
        report.epochs.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            train_mae,
            train_rmse,
            test_mae,
            test_rmse,
        });
        report.wall_clock.push(start.elapsed().as_secs_f64());
    }
    Ok(report)
}
