//! Explicit finite-difference generators for the benchmark systems.
//!
//! Every generator records the state after each `record_every` steps, so the
//! first snapshot sits at `t0 = dt_record` and the initial condition itself
//! is not part of the series.

mod burgers;
mod gray_scott;
mod hjb;
mod michaelis_menten;

pub use burgers::{gen_burgers, BurgersConfig};
pub use gray_scott::{gen_gray_scott, GrayScottConfig};
pub use hjb::{gen_hjb, HjbConfig, HjbInitial};
pub use michaelis_menten::{gen_michaelis_menten, MichaelisMentenConfig};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    DirichletZero,
}

/// Reproducibility metadata of a generated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverSpec {
    pub scheme: &'static str,
    /// The diffusion number actually used, e.g. `ν·dt/dx²`.
    pub stability_ratio: f64,
    pub boundary: Boundary,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn n_points(&self) -> usize {
        self.dims.iter().product()
    }
}

/// One named field over time, each snapshot flattened row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub name: String,
    pub snapshots: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesDataset {
    pub fields: Vec<Field>,
    pub grid: Grid,
    pub dt_record: f64,
    pub t0: f64,
    pub solver: Option<SolverSpec>,
}

impl TimeSeriesDataset {
    /// Checks shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.fields.is_empty() {
            return Err(Error::contract("dataset has no fields"));
        }
        let n_points = self.grid.n_points();
        let n_t = self.fields[0].snapshots.len();
        for f in &self.fields {
            if f.snapshots.len() != n_t {
                return Err(Error::dim(format!(
                    "field {} has {} snapshots, expected {n_t}",
                    f.name,
                    f.snapshots.len()
                )));
            }
            for s in &f.snapshots {
                if s.len() != n_points {
                    return Err(Error::dim(format!(
                        "field {} snapshot has {} points, grid has {n_points}",
                        f.name,
                        s.len()
                    )));
                }
                if s.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Divergence(format!(
                        "non-finite value in field {}",
                        f.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_snapshots(&self) -> usize {
        self.fields.first().map_or(0, |f| f.snapshots.len())
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::config(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub(crate) fn check_count(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::config(format!("{name} must be positive")));
    }
    Ok(())
}

pub(crate) fn ensure_finite(values: &[f64], step: usize, system: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence(format!(
            "{system} produced a non-finite value at step {step}"
        )));
    }
    Ok(())
}
