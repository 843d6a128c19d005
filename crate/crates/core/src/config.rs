//! Experiment configuration: one flat JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::autoencoder::DEFAULT_LADDER;
use crate::cells::CellKind;
use crate::pde::{
    gen_burgers, gen_gray_scott, gen_hjb, gen_michaelis_menten, BurgersConfig, GrayScottConfig,
    HjbConfig, MichaelisMentenConfig, TimeSeriesDataset,
};
use crate::qsim::{Entanglement, VqcConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Burgers,
    GrayScott,
    Hjb,
    Mm3d,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::Burgers,
        Experiment::GrayScott,
        Experiment::Hjb,
        Experiment::Mm3d,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Burgers => "burgers",
            Experiment::GrayScott => "gray-scott",
            Experiment::Hjb => "hjb",
            Experiment::Mm3d => "mm3d",
        }
    }

    pub fn default_epochs(self) -> usize {
        match self {
            Experiment::Burgers => 50,
            Experiment::GrayScott | Experiment::Hjb => 100,
            Experiment::Mm3d => 200,
        }
    }

    /// Runs the matching solver with any overrides applied.
    pub fn generate(self, solver: &SolverOverrides, seed: u64) -> Result<TimeSeriesDataset> {
        let s = solver;
        let reject = |key: &str, set: bool| {
            if set {
                Err(Error::config(format!(
                    "solver.{key} does not apply to {}",
                    self.tag()
                )))
            } else {
                Ok(())
            }
        };
        match self {
            Experiment::Burgers => {
                reject("t_end", s.t_end.is_some())?;
                reject("n_snapshots", s.n_snapshots.is_some())?;
                let d = BurgersConfig::default();
                gen_burgers(&BurgersConfig {
                    nu: s.nu.unwrap_or(d.nu),
                    nx: s.grid.unwrap_or(d.nx),
                    ny: s.grid.unwrap_or(d.ny),
                    dt: s.dt.unwrap_or(d.dt),
                    n_steps: s.n_steps.unwrap_or(d.n_steps),
                    record_every: s.record_every.unwrap_or(d.record_every),
                })
            }
            Experiment::GrayScott => {
                reject("nu", s.nu.is_some())?;
                reject("t_end", s.t_end.is_some())?;
                reject("n_snapshots", s.n_snapshots.is_some())?;
                let d = GrayScottConfig::default();
                gen_gray_scott(&GrayScottConfig {
                    n: s.grid.unwrap_or(d.n),
                    dt: s.dt.unwrap_or(d.dt),
                    n_steps: s.n_steps.unwrap_or(d.n_steps),
                    record_every: s.record_every.unwrap_or(d.record_every),
                    seed,
                    ..d
                })
            }
            Experiment::Hjb => {
                reject("nu", s.nu.is_some())?;
                reject("t_end", s.t_end.is_some())?;
                reject("n_snapshots", s.n_snapshots.is_some())?;
                let d = HjbConfig::default();
                gen_hjb(&HjbConfig {
                    n: s.grid.unwrap_or(d.n),
                    dt: s.dt.unwrap_or(d.dt),
                    n_steps: s.n_steps.unwrap_or(d.n_steps),
                    record_every: s.record_every.unwrap_or(d.record_every),
                    initial: d.initial,
                })
            }
            Experiment::Mm3d => {
                reject("nu", s.nu.is_some())?;
                reject("n_steps", s.n_steps.is_some())?;
                reject("record_every", s.record_every.is_some())?;
                let d = MichaelisMentenConfig::default();
                gen_michaelis_menten(&MichaelisMentenConfig {
                    n: s.grid.unwrap_or(d.n),
                    dt: s.dt.unwrap_or(d.dt),
                    t_end: s.t_end.unwrap_or(d.t_end),
                    n_snapshots: s.n_snapshots.unwrap_or(d.n_snapshots),
                    ..d
                })
            }
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment `{s}`")))
    }
}

/// Optional solver settings; anything left out keeps the solver default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    /// Points per axis.
    pub grid: Option<usize>,
    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub record_every: Option<usize>,
    /// Burgers viscosity.
    pub nu: Option<f64>,
    /// Michaelis-Menten end time.
    pub t_end: Option<f64>,
    /// Michaelis-Menten snapshot count.
    pub n_snapshots: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AutoencoderSettings {
    pub ladder: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for AutoencoderSettings {
    fn default() -> Self {
        Self {
            ladder: DEFAULT_LADDER.to_vec(),
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_model")]
    pub model: CellKind,
    #[serde(default = "four")]
    pub hidden_size: usize,
    #[serde(default = "one")]
    pub num_rnn_layers: usize,
    #[serde(default = "four")]
    pub n_qubits: usize,
    #[serde(default = "four")]
    pub n_quantum_layers: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    /// Defaults per experiment when absent.
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default = "default_latent")]
    pub latent_size: usize,
    #[serde(default = "four")]
    pub window_length: usize,
    #[serde(default = "default_split")]
    pub split_ratio: f64,
    /// Windows per Adam step; absent means full batch up to 512 windows,
    /// mini-batches of 32 above.
    #[serde(default)]
    pub batch_size: Option<usize>,
    /// Absent means the caller's fallback (the CLI reads `QRNN_SEED`).
    #[serde(default)]
    pub seed: Option<u64>,
    /// Existing dataset container; generated from `experiment` when absent.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverOverrides,
    #[serde(default)]
    pub autoencoder: AutoencoderSettings,
}

fn default_model() -> CellKind {
    CellKind::Qlstm
}
fn one() -> usize {
    1
}
fn four() -> usize {
    4
}
fn default_lr() -> f64 {
    0.01
}
fn default_latent() -> usize {
    16
}
fn default_split() -> f64 {
    0.8
}

pub const FULL_BATCH_LIMIT: usize = 512;
pub const MINI_BATCH: usize = 32;

impl ExperimentConfig {
    pub fn new(experiment: Experiment, model: CellKind) -> Self {
        Self {
            experiment,
            model,
            hidden_size: 4,
            num_rnn_layers: 1,
            n_qubits: 4,
            n_quantum_layers: 4,
            entanglement: Entanglement::Ring,
            learning_rate: default_lr(),
            epochs: None,
            latent_size: default_latent(),
            window_length: 4,
            split_ratio: default_split(),
            batch_size: None,
            seed: None,
            dataset: None,
            solver: SolverOverrides::default(),
            autoencoder: AutoencoderSettings::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn epochs(&self) -> usize {
        self.epochs
            .unwrap_or_else(|| self.experiment.default_epochs())
    }

    pub fn vqc(&self) -> VqcConfig {
        VqcConfig {
            n_qubits: self.n_qubits,
            n_layers: self.n_quantum_layers,
            entanglement: self.entanglement,
        }
    }

    /// Batch size for `n_train` training windows.
    pub fn effective_batch(&self, n_train: usize) -> usize {
        match self.batch_size {
            Some(b) => b,
            None if n_train <= FULL_BATCH_LIMIT => n_train.max(1),
            None => MINI_BATCH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hidden_size", self.hidden_size),
            ("num_rnn_layers", self.num_rnn_layers),
            ("n_qubits", self.n_qubits),
            ("n_quantum_layers", self.n_quantum_layers),
            ("latent_size", self.latent_size),
            ("window_length", self.window_length),
            ("autoencoder.batch_size", self.autoencoder.batch_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if self.epochs == Some(0) {
            return Err(Error::config("epochs must be positive"));
        }
        if self.batch_size == Some(0) {
            return Err(Error::config("batch_size must be positive"));
        }
        if self.autoencoder.ladder.contains(&0) {
            return Err(Error::config("autoencoder.ladder widths must be positive"));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("autoencoder.learning_rate", self.autoencoder.learning_rate),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::config(format!(
                "split_ratio must lie in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if self.model.is_quantum() {
            if self.hidden_size != self.n_qubits {
                return Err(Error::config(format!(
                    "hidden_size ({}) must equal n_qubits ({}) for {}",
                    self.hidden_size,
                    self.n_qubits,
                    self.model.name()
                )));
            }
            self.vqc().validate()?;
        }
        Ok(())
    }
}
