use std::f64::consts::PI;

use super::{
    check_count, check_positive, ensure_finite, Boundary, Field, Grid, SolverSpec,
    TimeSeriesDataset,
};
use crate::{Error, Result};

/// Initial value function on the closed unit square.
#[derive(Clone, Debug, PartialEq)]
pub enum HjbInitial {
    /// `sin(πx) sin(πy)`
    SinProduct,
    /// Constant in the interior, zero on the boundary.
    ConstantInterior(f64),
    /// Explicit grid values (row-major, zero on the boundary).
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HjbConfig {
    pub n: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
    pub initial: HjbInitial,
}

impl Default for HjbConfig {
    fn default() -> Self {
        Self {
            n: 50,
            dt: 5e-4,
            n_steps: 100,
            record_every: 1,
            initial: HjbInitial::SinProduct,
        }
    }
}

fn on_boundary(i: usize, j: usize, n: usize) -> bool {
    i == 0 || j == 0 || i == n - 1 || j == n - 1
}

/// `V ← V − dt · ½(V_x² + V_y²)` with central differences in the interior
/// and `V = 0` re-imposed on the boundary after every step.
pub fn gen_hjb(cfg: &HjbConfig) -> Result<TimeSeriesDataset> {
    check_positive("dt", cfg.dt)?;
    check_count("n_steps", cfg.n_steps)?;
    check_count("record_every", cfg.record_every)?;
    let n = cfg.n;
    if n < 3 {
        return Err(Error::config("HJB grid needs at least 3 points per axis"));
    }
    let h = 1.0 / (n - 1) as f64;

    let mut v = match &cfg.initial {
        HjbInitial::SinProduct => {
            let mut v = vec![0.0; n * n];
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    v[i * n + j] = (PI * i as f64 * h).sin() * (PI * j as f64 * h).sin();
                }
            }
            v
        }
        HjbInitial::ConstantInterior(c) => {
            let mut v = vec![0.0; n * n];
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    v[i * n + j] = *c;
                }
            }
            v
        }
        HjbInitial::Values(vals) => {
            if vals.len() != n * n {
                return Err(Error::dim(format!(
                    "initial value has {} points, grid has {}",
                    vals.len(),
                    n * n
                )));
            }
            vals.clone()
        }
    };
    ensure_finite(&v, 0, "HJB")?;
    for i in 0..n {
        for j in 0..n {
            if on_boundary(i, j, n) && v[i * n + j] != 0.0 {
                return Err(Error::contract(
                    "initial value function must vanish on the boundary",
                ));
            }
        }
    }

    let mut next = v.clone();
    let mut snaps = Vec::with_capacity(cfg.n_steps / cfg.record_every);
    for step in 1..=cfg.n_steps {
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let k = i * n + j;
                let vx = (v[k + n] - v[k - n]) / (2.0 * h);
                let vy = (v[k + 1] - v[k - 1]) / (2.0 * h);
                next[k] = v[k] - cfg.dt * 0.5 * (vx * vx + vy * vy);
            }
        }
        for i in 0..n {
            for j in 0..n {
                if on_boundary(i, j, n) {
                    next[i * n + j] = 0.0;
                }
            }
        }
        ensure_finite(&next, step, "HJB")?;
        std::mem::swap(&mut v, &mut next);
        if step % cfg.record_every == 0 {
            snaps.push(v.clone());
        }
    }

    let dt_record = cfg.dt * cfg.record_every as f64;
    Ok(TimeSeriesDataset {
        fields: vec![Field {
            name: "V".into(),
            snapshots: snaps,
        }],
        grid: Grid {
            dims: vec![n, n],
            spacing: vec![h, h],
        },
        dt_record,
        t0: dt_record,
        solver: Some(SolverSpec {
            scheme: "explicit-euler/central-gradient",
            stability_ratio: cfg.dt / (h * h),
            boundary: Boundary::DirichletZero,
            seed: None,
        }),
    })
}
