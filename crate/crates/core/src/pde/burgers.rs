use std::f64::consts::PI;

use super::{
    check_count, check_positive, ensure_finite, Boundary, Field, Grid, SolverSpec,
    TimeSeriesDataset,
};
use crate::{Error, Result};

/// Viscous 2D Burgers on the periodic unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct BurgersConfig {
    pub nu: f64,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

impl Default for BurgersConfig {
    fn default() -> Self {
        Self {
            nu: 0.01,
            nx: 64,
            ny: 64,
            dt: 1e-4,
            n_steps: 5000,
            record_every: 50,
        }
    }
}

/// Explicit Euler with first-order upwind advection and central diffusion.
///
/// Grid points include both `x = 0` and `x = 1`; under periodicity they are
/// the same location, so the last row/column mirrors the first and the
/// stencil wraps over the `n - 1` distinct points.
pub fn gen_burgers(cfg: &BurgersConfig) -> Result<TimeSeriesDataset> {
    check_positive("nu", cfg.nu)?;
    check_positive("dt", cfg.dt)?;
    check_count("n_steps", cfg.n_steps)?;
    check_count("record_every", cfg.record_every)?;
    if cfg.nx < 3 || cfg.ny < 3 {
        return Err(Error::config(
            "Burgers grid needs at least 3 points per axis",
        ));
    }
    let (nx, ny) = (cfg.nx, cfg.ny);
    let dx = 1.0 / (nx - 1) as f64;
    let dy = 1.0 / (ny - 1) as f64;

    let mut u = vec![0.0; nx * ny];
    let mut v = vec![0.0; nx * ny];
    for i in 0..nx {
        let x = i as f64 * dx;
        for j in 0..ny {
            let y = j as f64 * dy;
            u[i * ny + j] = (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
            v[i * ny + j] = (PI * x).sin() * (PI * y).sin();
        }
    }

    let h2 = dx.min(dy).powi(2);
    let diffusion_limit = h2 / (4.0 * cfg.nu);
    if cfg.dt > diffusion_limit {
        return Err(Error::config(format!(
            "diffusion stability violated: dt = {} > dx^2/(4 nu) = {diffusion_limit}",
            cfg.dt
        )));
    }
    let umax = u.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let cfl = cfg.dt * (umax / dx + vmax / dy);
    if cfl > 1.0 {
        return Err(Error::config(format!(
            "advective CFL violated: dt (|u|/dx + |v|/dy) = {cfl} > 1"
        )));
    }

    let (mx, my) = (nx - 1, ny - 1);
    let mut un = u.clone();
    let mut vn = v.clone();
    let n_records = cfg.n_steps / cfg.record_every;
    let mut su = Vec::with_capacity(n_records);
    let mut sv = Vec::with_capacity(n_records);

    for step in 1..=cfg.n_steps {
        for i in 0..mx {
            let (im, ip) = ((i + mx - 1) % mx, (i + 1) % mx);
            for j in 0..my {
                let (jm, jp) = ((j + my - 1) % my, (j + 1) % my);
                let k = i * ny + j;
                let (uc, vc) = (u[k], v[k]);
                let adv = |f: &[f64]| {
                    let fx = if uc > 0.0 {
                        (f[k] - f[im * ny + j]) / dx
                    } else {
                        (f[ip * ny + j] - f[k]) / dx
                    };
                    let fy = if vc > 0.0 {
                        (f[k] - f[i * ny + jm]) / dy
                    } else {
                        (f[i * ny + jp] - f[k]) / dy
                    };
                    uc * fx + vc * fy
                };
                let lap = |f: &[f64]| {
                    (f[ip * ny + j] - 2.0 * f[k] + f[im * ny + j]) / (dx * dx)
                        + (f[i * ny + jp] - 2.0 * f[k] + f[i * ny + jm]) / (dy * dy)
                };
                un[k] = uc + cfg.dt * (cfg.nu * lap(&u) - adv(&u));
                vn[k] = vc + cfg.dt * (cfg.nu * lap(&v) - adv(&v));
            }
        }
        mirror_periodic(&mut un, nx, ny);
        mirror_periodic(&mut vn, nx, ny);
        std::mem::swap(&mut u, &mut un);
        std::mem::swap(&mut v, &mut vn);
        if step % cfg.record_every == 0 {
            ensure_finite(&u, step, "Burgers")?;
            ensure_finite(&v, step, "Burgers")?;
            su.push(u.clone());
            sv.push(v.clone());
        }
    }

    let dt_record = cfg.dt * cfg.record_every as f64;
    Ok(TimeSeriesDataset {
        fields: vec![
            Field {
                name: "u".into(),
                snapshots: su,
            },
            Field {
                name: "v".into(),
                snapshots: sv,
            },
        ],
        grid: Grid {
            dims: vec![nx, ny],
            spacing: vec![dx, dy],
        },
        dt_record,
        t0: dt_record,
        solver: Some(SolverSpec {
            scheme: "explicit-euler/upwind-advection/central-diffusion",
            stability_ratio: cfg.nu * cfg.dt / h2,
            boundary: Boundary::Periodic,
            seed: None,
        }),
    })
}

fn mirror_periodic(f: &mut [f64], nx: usize, ny: usize) {
    for i in 0..nx - 1 {
        f[i * ny + ny - 1] = f[i * ny];
    }
    let (first, last) = ((0..ny), (nx - 1) * ny);
    for j in first {
        f[last + j] = f[j];
    }
}
