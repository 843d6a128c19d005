use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::data::{split_indices, window_count, NormStats, WindowedSet};
use super::metrics::mae_rmse;
use super::train::{predict_set, train_model, MetricReport, TrainSettings};
use crate::autoencoder::{train_autoencoder, AeTrainConfig, Autoencoder};
use crate::cells::StackedRnn;
use crate::config::ExperimentConfig;
use crate::container::{write_atomic, Section, SnapshotContainer};
use crate::diffcore::{AdamConfig, Tensor};
use crate::pde::{Field, Grid, TimeSeriesDataset};
use crate::{Error, Result};

/// Independent seed for one purpose and one field.
pub fn derive_seed(seed: u64, purpose: u64, field: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose * 1024 + field as u64);
    rng.next_u64()
}

const STREAM_AE_INIT: u64 = 1;
const STREAM_AE_SHUFFLE: u64 = 2;
const STREAM_RNN_INIT: u64 = 3;
const STREAM_RNN_SHUFFLE: u64 = 4;

/// Window ids of the train and test sides.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    pub window_length: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitPlan {
    pub fn new(n_t: usize, cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let n = window_count(n_t, cfg.window_length)?;
        let (train, test) = split_indices(n, cfg.split_ratio, seed)?;
        Ok(Self {
            window_length: cfg.window_length,
            train,
            test,
        })
    }

    /// Snapshot indices read by training windows, inputs and targets.
    pub fn training_snapshots(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .train
            .iter()
            .flat_map(|&s| s..=s + self.window_length)
            .collect();
        set.into_iter().collect()
    }
}

/// Trained normalization and autoencoder of one field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldCodec {
    pub stats: NormStats,
    pub autoencoder: Autoencoder,
}

impl FieldCodec {
    pub fn encode_all(&self, snapshots: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = self.autoencoder.input_size();
        let data: Vec<f64> = snapshots.iter().flat_map(|s| self.stats.apply(s)).collect();
        let z = self
            .autoencoder
            .encode_batch(&Tensor::new(vec![snapshots.len(), n], data)?)?;
        Ok(z.data()
            .chunks(self.autoencoder.latent_size())
            .map(<[f64]>::to_vec)
            .collect())
    }

    /// Decodes latents back to physical units.
    pub fn decode_all(&self, latents: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let k = self.autoencoder.latent_size();
        let data: Vec<f64> = latents.concat();
        let x = self
            .autoencoder
            .decode_batch(&Tensor::new(vec![latents.len(), k], data)?)?;
        Ok(x.data()
            .chunks(self.autoencoder.input_size())
            .map(|s| self.stats.invert(s))
            .collect())
    }

    pub fn to_container(&self) -> Result<SnapshotContainer> {
        let mut c = params_container(self.autoencoder.params())?;
        c.sections.insert(
            0,
            Section::new("norm", vec![2], vec![self.stats.min, self.stats.max])?,
        );
        Ok(c)
    }

    /// Restores a checkpoint into an autoencoder built from `cfg`.
    pub fn from_container(
        c: &SnapshotContainer,
        n_input: usize,
        cfg: &ExperimentConfig,
    ) -> Result<Self> {
        let norm = c.tensor("norm")?;
        let stats = NormStats::new(norm.data()[0], norm.data()[1])?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut autoencoder =
            Autoencoder::new(n_input, &cfg.autoencoder.ladder, cfg.latent_size, &mut rng)?;
        load_params(autoencoder.params_mut(), c)?;
        Ok(Self { stats, autoencoder })
    }
}

fn param_name(i: usize) -> String {
    format!("param.{i:04}")
}

/// Checkpoint of an ordered parameter list.
pub fn params_container(params: Vec<&Tensor>) -> Result<SnapshotContainer> {
    SnapshotContainer::from_tensors(
        params
            .into_iter()
            .enumerate()
            .map(|(i, t)| (param_name(i), t)),
    )
}

/// Copies checkpoint sections into `params`, checking every shape.
pub fn load_params(params: Vec<&mut Tensor>, c: &SnapshotContainer) -> Result<()> {
    let expected = c
        .sections
        .iter()
        .filter(|s| s.name.starts_with("param."))
        .count();
    if expected != params.len() {
        return Err(Error::Format(format!(
            "checkpoint holds {expected} parameters, model has {}",
            params.len()
        )));
    }
    for (i, p) in params.into_iter().enumerate() {
        let t = c.tensor(&param_name(i))?;
        if t.shape() != p.shape() {
            return Err(Error::Format(format!(
                "parameter {i} has shape {:?} in the checkpoint, model expects {:?}",
                t.shape(),
                p.shape()
            )));
        }
        *p = t;
    }
    Ok(())
}

/// Fits normalization on the training snapshots and trains the autoencoder
/// on them. Returns the per-epoch reconstruction loss as well.
pub fn fit_codec(
    field: &Field,
    field_index: usize,
    plan: &SplitPlan,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(FieldCodec, Vec<f64>)> {
    let used = plan.training_snapshots();
    let stats = NormStats::fit(used.iter().map(|&i| field.snapshots[i].as_slice()))
        .map_err(|e| e.in_stage("normalize"))?;
    let train: Vec<Vec<f64>> = used
        .iter()
        .map(|&i| stats.apply(&field.snapshots[i]))
        .collect();
    let n_input = train[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_AE_INIT, field_index));
    let mut autoencoder =
        Autoencoder::new(n_input, &cfg.autoencoder.ladder, cfg.latent_size, &mut rng)
            .map_err(|e| e.in_stage("autoencoder"))?;
    let history = train_autoencoder(
        &mut autoencoder,
        &train,
        &AeTrainConfig {
            epochs: cfg.autoencoder.epochs,
            batch_size: cfg.autoencoder.batch_size,
            adam: AdamConfig::with_learning_rate(cfg.autoencoder.learning_rate),
            seed: derive_seed(seed, STREAM_AE_SHUFFLE, field_index),
        },
    )
    .map_err(|e| e.in_stage("autoencoder"))?;
    Ok((FieldCodec { stats, autoencoder }, history))
}

/// Encoded windows of the train and test sides.
pub fn latent_sets(
    field: &Field,
    codec: &FieldCodec,
    plan: &SplitPlan,
) -> Result<(WindowedSet, WindowedSet)> {
    let latents = codec
        .encode_all(&field.snapshots)
        .map_err(|e| e.in_stage("encode"))?;
    let all =
        super::make_windows(&latents, plan.window_length).map_err(|e| e.in_stage("window"))?;
    Ok((all.subset(&plan.train), all.subset(&plan.test)))
}

pub fn new_model(cfg: &ExperimentConfig, field_index: usize, seed: u64) -> Result<StackedRnn> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_RNN_INIT, field_index));
    StackedRnn::new(
        cfg.model,
        cfg.num_rnn_layers,
        cfg.latent_size,
        cfg.hidden_size,
        cfg.latent_size,
        cfg.vqc(),
        &mut rng,
    )
}

/// Builds and trains the recurrent model of one field.
pub fn fit_model(
    train: &WindowedSet,
    test: &WindowedSet,
    field_index: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(StackedRnn, MetricReport)> {
    let mut model = new_model(cfg, field_index, seed).map_err(|e| e.in_stage("init"))?;
    let settings = TrainSettings {
        epochs: cfg.epochs(),
        adam: AdamConfig::with_learning_rate(cfg.learning_rate),
        batch_size: cfg.effective_batch(train.len()),
        seed: derive_seed(seed, STREAM_RNN_SHUFFLE, field_index),
    };
    let report =
        train_model(&mut model, train, test, &settings).map_err(|e| e.in_stage("train"))?;
    Ok((model, report))
}

#[derive(Clone, Debug)]
pub struct FieldOutcome {
    pub name: String,
    pub codec: FieldCodec,
    pub ae_history: Vec<f64>,
    pub model: StackedRnn,
    pub report: MetricReport,
    /// Snapshot index of each exported test prediction, ascending.
    pub test_targets: Vec<usize>,
    /// Physical-space predictions, aligned with `test_targets`.
    pub predictions: Vec<Vec<f64>>,
    pub truth: Vec<Vec<f64>>,
    pub mae: f64,
    pub rmse: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub grid: Grid,
    pub dt_record: f64,
    pub fields: Vec<FieldOutcome>,
    /// Pooled over every field and test snapshot, physical units.
    pub mae: f64,
    pub rmse: f64,
}

/// The whole chain: split, normalize, train the autoencoder, encode, window,
/// train the recurrent model, decode test predictions, de-normalize and score.
/// One autoencoder and one recurrent model per field.
pub fn run_experiment(
    dataset: &TimeSeriesDataset,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<ExperimentOutcome> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    dataset.validate().map_err(|e| e.in_stage("dataset"))?;
    let plan = SplitPlan::new(dataset.n_snapshots(), cfg, seed).map_err(|e| e.in_stage("split"))?;

    let mut fields = Vec::with_capacity(dataset.fields.len());
    for (fi, field) in dataset.fields.iter().enumerate() {
        let (codec, ae_history) = fit_codec(field, fi, &plan, cfg, seed)?;
        let (train, test) = latent_sets(field, &codec, &plan)?;
        let (model, report) = fit_model(&train, &test, fi, cfg, seed)?;

        let mut order: Vec<usize> = (0..test.len()).collect();
        order.sort_by_key(|&i| test.starts[i]);
        let test = test.subset(&order);
        let latent = predict_set(&model, &test).map_err(|e| e.in_stage("predict"))?;
        let predictions = codec
            .decode_all(&latent)
            .map_err(|e| e.in_stage("decode"))?;
        let test_targets = test.target_indices();
        let truth: Vec<Vec<f64>> = test_targets
            .iter()
            .map(|&t| field.snapshots[t].clone())
            .collect();
        let (mae, rmse) = mae_rmse(&truth, &predictions).map_err(|e| e.in_stage("metrics"))?;
        fields.push(FieldOutcome {
            name: field.name.clone(),
            codec,
            ae_history,
            model,
            report,
            test_targets,
            predictions,
            truth,
            mae,
            rmse,
        });
    }

    let all_truth: Vec<Vec<f64>> = fields.iter().flat_map(|f| f.truth.clone()).collect();
    let all_pred: Vec<Vec<f64>> = fields.iter().flat_map(|f| f.predictions.clone()).collect();
    let (mae, rmse) = mae_rmse(&all_truth, &all_pred).map_err(|e| e.in_stage("metrics"))?;
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        seed,
        grid: dataset.grid.clone(),
        dt_record: dataset.dt_record,
        fields,
        mae,
        rmse,
    })
}

impl ExperimentOutcome {
    fn snapshots_container(
        &self,
        pick: impl Fn(&FieldOutcome) -> &Vec<Vec<f64>>,
    ) -> Result<SnapshotContainer> {
        let fields = self
            .fields
            .iter()
            .map(|f| Field {
                name: f.name.clone(),
                snapshots: pick(f).clone(),
            })
            .collect();
        SnapshotContainer::from_dataset(&TimeSeriesDataset {
            fields,
            grid: self.grid.clone(),
            dt_record: self.dt_record,
            t0: self.dt_record,
            solver: None,
        })
    }

    pub fn predictions_container(&self) -> Result<SnapshotContainer> {
        self.snapshots_container(|f| &f.predictions)
    }

    pub fn truth_container(&self) -> Result<SnapshotContainer> {
        self.snapshots_container(|f| &f.truth)
    }

    /// Plain-text summary; deterministic for a fixed config and seed.
    pub fn summary_json(&self) -> String {
        let fields: Vec<serde_json::Value> = self
            .fields
            .iter()
            .map(|f| {
                serde_json::json!({
                    "name": f.name,
                    "mae": f.mae,
                    "rmse": f.rmse,
                    "norm_min": f.codec.stats.min,
                    "norm_max": f.codec.stats.max,
                    "test_snapshots": f.test_targets,
                    "autoencoder_final_loss": f.ae_history.last(),
                    "parameters": f.model.param_count(),
                })
            })
            .collect();
        let v = serde_json::json!({
            "experiment": self.config.experiment.tag(),
            "model": self.config.model.name(),
            "seed": self.seed,
            "epochs": self.config.epochs(),
            "mae": self.mae,
            "rmse": self.rmse,
            "fields": fields,
        });
        serde_json::to_string_pretty(&v).expect("summary serializes") + "\n"
    }

    /// Writes metrics, predictions, ground truth, checkpoints and a summary
    /// into `dir`; returns the paths written.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        let mut put = |name: String, bytes: Vec<u8>| -> Result<()> {
            let p = dir.join(name);
            write_atomic(&p, &bytes)?;
            written.push(p);
            Ok(())
        };
        for f in &self.fields {
            put(
                format!("metrics_{}.csv", f.name),
                f.report.to_csv().into_bytes(),
            )?;
            put(
                format!("autoencoder_{}.qrds", f.name),
                f.codec.to_container()?.to_bytes(),
            )?;
            put(
                format!("model_{}.qrds", f.name),
                params_container(f.model.params())?.to_bytes(),
            )?;
        }
        put(
            "predictions.qrds".into(),
            self.predictions_container()?.to_bytes(),
        )?;
        put("truth.qrds".into(), self.truth_container()?.to_bytes())?;
        put("summary.json".into(), self.summary_json().into_bytes())?;
        put("config.json".into(), self.config.to_json().into_bytes())?;
        Ok(written)
    }
}
