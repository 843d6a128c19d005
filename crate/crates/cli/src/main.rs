//! `qrnn`: dataset generation, training and evaluation from the command line.

mod slice;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrnn_core::cells::CellKind;
use qrnn_core::config::{Experiment, ExperimentConfig, SolverOverrides};
use qrnn_core::container::{write_atomic, SnapshotContainer};
use qrnn_core::pde::TimeSeriesDataset;
use qrnn_core::pipeline::{
    fit_codec, fit_model, latent_sets, mae_rmse, params_container, run_experiment, FieldCodec,
    SplitPlan,
};
use qrnn_core::Error;

use crate::slice::SliceSpec;

#[derive(Parser)]
#[command(
    name = "qrnn",
    version,
    about = "Quantum recurrent surrogates for time-dependent PDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset with the finite-difference solver.
    Gen(GenArgs),
    /// Train the per-field autoencoders and write their checkpoints.
    TrainAe(RunArgs),
    /// Train the recurrent models on top of existing autoencoder checkpoints.
    TrainRnn(RunArgs),
    /// Run the whole pipeline and export metrics, predictions and checkpoints.
    Run(RunArgs),
    /// Compare a prediction container against ground truth.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SolverFlags {
    /// Grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    record_every: Option<usize>,
    /// Burgers viscosity.
    #[arg(long)]
    nu: Option<f64>,
    /// Michaelis-Menten end time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Michaelis-Menten snapshot count.
    #[arg(long)]
    n_snapshots: Option<usize>,
}

impl SolverFlags {
    fn apply(&self, s: &mut SolverOverrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if self.$f.is_some() { s.$f = self.$f; } )* };
        }
        set!(grid, dt, n_steps, record_every, nu, t_end, n_snapshots);
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_experiment)]
    experiment: Experiment,
    #[arg(long)]
    out: PathBuf,
    /// Falls back to QRNN_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Also export a 2D slice as CSV: FIELD:T or FIELD:T:K (K indexes the
    /// first axis of a 3D grid).
    #[arg(long, value_parser = SliceSpec::parse)]
    csv_slice: Option<SliceSpec>,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Required when no config is given; overrides the config otherwise.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<Experiment>,
    #[arg(long, value_parser = parse_model)]
    model: Option<CellKind>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Existing dataset container instead of generating one.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Directory holding autoencoder checkpoints (train-rnn); defaults to --out.
    #[arg(long)]
    ae_dir: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    /// Export a 2D slice of the predictions and the truth as CSV.
    #[arg(long, value_parser = SliceSpec::parse)]
    csv_slice: Option<SliceSpec>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_model(s: &str) -> Result<CellKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flag, then config, then `QRNN_SEED`, then 0.
fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, Error> {
    if let Some(s) = flag.or(config) {
        return Ok(s);
    }
    match std::env::var("QRNN_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("QRNN_SEED is not an unsigned integer: {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Config(_) => 2,
        Error::Divergence(_) => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::TrainAe(a) => cmd_train_ae(&a),
        Command::TrainRnn(a) => cmd_train_rnn(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn describe(d: &TimeSeriesDataset) -> String {
    let names: Vec<&str> = d.fields.iter().map(|f| f.name.as_str()).collect();
    let dims: Vec<String> = d.grid.dims.iter().map(usize::to_string).collect();
    format!(
        "{} field(s) [{}], grid {}, {} snapshots, dt_record {}",
        d.fields.len(),
        names.join(", "),
        dims.join("x"),
        d.n_snapshots(),
        d.dt_record
    )
}

fn cmd_gen(a: &GenArgs) -> Result<(), Error> {
    let seed = resolve_seed(a.seed, None)?;
    let mut solver = SolverOverrides::default();
    a.solver.apply(&mut solver);
    let d = a.experiment.generate(&solver, seed)?;
    SnapshotContainer::from_dataset(&d)?.write(&a.out)?;
    println!("{}: {}", a.experiment.tag(), describe(&d));
    if let Some(spec) = &a.csv_slice {
        let path = slice::sibling(&a.out, spec);
        spec.write(&d, &path)?;
        println!("slice written to {}", path.display());
    }
    Ok(())
}

/// Config from file and flags, plus the resolved seed.
fn load_config(a: &RunArgs) -> Result<(ExperimentConfig, u64), Error> {
    let mut cfg = match (&a.config, a.experiment) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(e)) => ExperimentConfig::new(e, CellKind::Qlstm),
        (None, None) => {
            return Err(Error::Config(
                "either --config or --experiment is required".into(),
            ))
        }
    };
    if let Some(e) = a.experiment {
        cfg.experiment = e;
    }
    if let Some(m) = a.model {
        cfg.model = m;
    }
    if a.epochs.is_some() {
        cfg.epochs = a.epochs;
    }
    if a.dataset.is_some() {
        cfg.dataset = a.dataset.clone();
    }
    a.solver.apply(&mut cfg.solver);
    cfg.validate()?;
    let seed = resolve_seed(a.seed, cfg.seed)?;
    Ok((cfg, seed))
}

fn load_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<TimeSeriesDataset, Error> {
    match &cfg.dataset {
        Some(p) => SnapshotContainer::read(p)
            .and_then(|c| c.to_dataset())
            .map_err(|e| e.in_stage("load dataset")),
        None => cfg
            .experiment
            .generate(&cfg.solver, seed)
            .map_err(|e| e.in_stage("generate")),
    }
}

fn ae_path(dir: &Path, field: &str) -> PathBuf {
    dir.join(format!("autoencoder_{field}.qrds"))
}

fn cmd_train_ae(a: &RunArgs) -> Result<(), Error> {
    let (cfg, seed) = load_config(a)?;
    let d = load_dataset(&cfg, seed)?;
    let plan = SplitPlan::new(d.n_snapshots(), &cfg, seed).map_err(|e| e.in_stage("split"))?;
    for (fi, field) in d.fields.iter().enumerate() {
        let (codec, history) = fit_codec(field, fi, &plan, &cfg, seed)?;
        codec.to_container()?.write(ae_path(&a.out, &field.name))?;
        let csv: String = std::iter::once("epoch,loss\n".to_string())
            .chain(
                history
                    .iter()
                    .enumerate()
                    .map(|(i, l)| format!("{},{l:?}\n", i + 1)),
            )
            .collect();
        write_atomic(
            &a.out.join(format!("ae_loss_{}.csv", field.name)),
            csv.as_bytes(),
        )?;
        println!(
            "{}: autoencoder trained, final loss {:?}",
            field.name,
            history.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

fn cmd_train_rnn(a: &RunArgs) -> Result<(), Error> {
    let (cfg, seed) = load_config(a)?;
    let d = load_dataset(&cfg, seed)?;
    let plan = SplitPlan::new(d.n_snapshots(), &cfg, seed).map_err(|e| e.in_stage("split"))?;
    let ae_dir = a.ae_dir.as_deref().unwrap_or(&a.out);
    for (fi, field) in d.fields.iter().enumerate() {
        let c = SnapshotContainer::read(ae_path(ae_dir, &field.name))
            .map_err(|e| e.in_stage("load autoencoder"))?;
        let codec = FieldCodec::from_container(&c, d.grid.n_points(), &cfg)
            .map_err(|e| e.in_stage("load autoencoder"))?;
        let (train, test) = latent_sets(field, &codec, &plan)?;
        let (model, report) = fit_model(&train, &test, fi, &cfg, seed)?;
        params_container(model.params())?
            .write(a.out.join(format!("model_{}.qrds", field.name)))?;
        write_atomic(
            &a.out.join(format!("metrics_{}.csv", field.name)),
            report.to_csv().as_bytes(),
        )?;
        if let Some((mae, rmse)) = report.final_test() {
            println!("{}: latent test MAE {mae:?}, RMSE {rmse:?}", field.name);
        }
    }
    Ok(())
}

fn cmd_run(a: &RunArgs) -> Result<(), Error> {
    let (cfg, seed) = load_config(a)?;
    let d = load_dataset(&cfg, seed)?;
    println!("{}: {}", cfg.experiment.tag(), describe(&d));
    let out = run_experiment(&d, &cfg, seed)?;
    out.write_artifacts(&a.out)?;
    for f in &out.fields {
        println!("{}: test MAE {:?}, RMSE {:?}", f.name, f.mae, f.rmse);
    }
    println!("all fields: test MAE {:?}, RMSE {:?}", out.mae, out.rmse);
    if let Some(spec) = &a.csv_slice {
        for (tag, c) in [
            ("pred", out.predictions_container()?),
            ("truth", out.truth_container()?),
        ] {
            let path = a.out.join(format!("{tag}_{}.csv", spec.stem()));
            spec.write(&c.to_dataset()?, &path)?;
        }
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs) -> Result<(), Error> {
    let truth = SnapshotContainer::read(&a.truth)?;
    let pred = SnapshotContainer::read(&a.pred)?;
    if truth.sections.len() != pred.sections.len() {
        return Err(Error::Dimension(format!(
            "truth has {} sections, prediction has {}",
            truth.sections.len(),
            pred.sections.len()
        )));
    }
    let (mut t_all, mut p_all) = (Vec::new(), Vec::new());
    for (t, p) in truth.sections.iter().zip(&pred.sections) {
        if t.name != p.name || t.dims != p.dims {
            return Err(Error::Dimension(format!(
                "section {} {:?} does not match {} {:?}",
                t.name, t.dims, p.name, p.dims
            )));
        }
        t_all.extend_from_slice(&t.data);
        p_all.extend_from_slice(&p.data);
    }
    let (mae, rmse) = mae_rmse(&[t_all], &[p_all])?;
    println!("mae {mae:?}");
    println!("rmse {rmse:?}");
    Ok(())
}
