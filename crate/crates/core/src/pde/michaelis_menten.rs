use super::{
    check_count, check_positive, ensure_finite, Boundary, Field, Grid, SolverSpec,
    TimeSeriesDataset,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MichaelisMentenConfig {
    pub d: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub n_snapshots: usize,
}

impl Default for MichaelisMentenConfig {
    fn default() -> Self {
        Self {
            d: 0.2,
            n: 32,
            dt: 1e-4,
            t_end: 1.0,
            n_snapshots: 20,
        }
    }
}

/// `u_t = d ∇²u − u/(1+u)` on the unit cube, `u = 0` on the boundary and
/// `u = 1` inside at `t = 0`. Explicit Euler with the 7-point Laplacian.
pub fn gen_michaelis_menten(cfg: &MichaelisMentenConfig) -> Result<TimeSeriesDataset> {
    check_positive("d", cfg.d)?;
    check_positive("dt", cfg.dt)?;
    check_positive("t_end", cfg.t_end)?;
    check_count("n_snapshots", cfg.n_snapshots)?;
    let n = cfg.n;
    if n < 3 {
        return Err(Error::config(
            "Michaelis-Menten grid needs at least 3 points per axis",
        ));
    }
    let h = 1.0 / (n - 1) as f64;
    let ratio = 6.0 * cfg.d * cfg.dt / (h * h);
    if ratio > 1.0 {
        return Err(Error::config(format!(
            "diffusion stability violated: 6 d dt / dx^2 = {ratio} > 1"
        )));
    }
    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    if n_steps == 0 || !n_steps.is_multiple_of(cfg.n_snapshots) {
        return Err(Error::config(format!(
            "{n_steps} steps cannot be split into {} equal intervals",
            cfg.n_snapshots
        )));
    }
    let record_every = n_steps / cfg.n_snapshots;

    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let interior = |i: usize| i > 0 && i < n - 1;
    let mut u = vec![0.0; n * n * n];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            for k in 1..n - 1 {
                u[idx(i, j, k)] = 1.0;
            }
        }
    }

    let coef = cfg.d * cfg.dt / (h * h);
    let (sx, sy) = (n * n, n);
    let mut next = u.clone();
    let mut snaps = Vec::with_capacity(cfg.n_snapshots);
    for step in 1..=n_steps {
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                for k in 1..n - 1 {
                    let c = idx(i, j, k);
                    let uc = u[c];
                    let lap = u[c + sx] + u[c - sx] + u[c + sy] + u[c - sy] + u[c + 1] + u[c - 1]
                        - 6.0 * uc;
                    next[c] = uc + coef * lap - cfg.dt * uc / (1.0 + uc);
                }
            }
        }
        debug_assert!((0..n).all(|i| interior(i) || next[idx(i, 1, 1)] == 0.0));
        if step % record_every == 0 {
            ensure_finite(&next, step, "Michaelis-Menten")?;
            snaps.push(next.clone());
        }
        std::mem::swap(&mut u, &mut next);
    }

    let dt_record = cfg.dt * record_every as f64;
    Ok(TimeSeriesDataset {
        fields: vec![Field {
            name: "u".into(),
            snapshots: snaps,
        }],
        grid: Grid {
            dims: vec![n, n, n],
            spacing: vec![h, h, h],
        },
        dt_record,
        t0: dt_record,
        solver: Some(SolverSpec {
            scheme: "explicit-euler/7-point-laplacian",
            stability_ratio: ratio,
            boundary: Boundary::DirichletZero,
            seed: None,
        }),
    })
}
