//! The experiment chain from raw snapshots to scored reconstructions.

mod data;
mod experiment;
mod metrics;
mod train;

pub use data::{
    denormalize, make_windows, normalize, split, split_indices, window_count, NormStats,
    WindowedSet,
};
pub use experiment::{
    derive_seed, fit_codec, fit_model, latent_sets, load_params, new_model, params_container,
    run_experiment, ExperimentOutcome, FieldCodec, FieldOutcome, SplitPlan,
};
pub use metrics::{mae, mae_rmse, rmse};
pub use train::{predict_set, train_model, EpochMetrics, MetricReport, TrainSettings, CSV_HEADER};
