use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_count, check_positive, ensure_finite, Boundary, Field, Grid, SolverSpec,
    TimeSeriesDataset,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct GrayScottConfig {
    pub du: f64,
    pub dv: f64,
    pub feed: f64,
    pub kill: f64,
    pub dx: f64,
    pub dt: f64,
    pub n: usize,
    pub n_steps: usize,
    pub record_every: usize,
    pub seed: u64,
    /// Seed the central square; `false` leaves the homogeneous state.
    pub perturb: bool,
}

impl Default for GrayScottConfig {
    fn default() -> Self {
        Self {
            du: 0.16,
            dv: 0.08,
            feed: 0.035,
            kill: 0.060,
            dx: 1.0,
            dt: 1.0,
            n: 64,
            n_steps: 1000,
            record_every: 10,
            seed: 0,
            perturb: true,
        }
    }
}

const SQUARE: usize = 10;
const NOISE: f64 = 0.02;

/// Explicit Euler with the 5-point Laplacian on a periodic `n × n` lattice.
/// Background `u = 1, v = 0`; a central square starts at `u = 0.5,
/// v = 0.25` plus uniform noise in `±0.02`.
pub fn gen_gray_scott(cfg: &GrayScottConfig) -> Result<TimeSeriesDataset> {
    for (name, v) in [
        ("Du", cfg.du),
        ("Dv", cfg.dv),
        ("F", cfg.feed),
        ("k", cfg.kill),
        ("dx", cfg.dx),
        ("dt", cfg.dt),
    ] {
        check_positive(name, v)?;
    }
    check_count("n_steps", cfg.n_steps)?;
    check_count("record_every", cfg.record_every)?;
    let n = cfg.n;
    if n < 3 {
        return Err(Error::config(
            "Gray-Scott grid needs at least 3 points per axis",
        ));
    }

    let mut u = vec![1.0; n * n];
    let mut v = vec![0.0; n * n];
    if cfg.perturb {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let side = SQUARE.min(n);
        let lo = n / 2 - side / 2;
        for i in lo..lo + side {
            for j in lo..lo + side {
                let k = i * n + j;
                u[k] = 0.5 + rng.gen_range(-NOISE..=NOISE);
                v[k] = 0.25 + rng.gen_range(-NOISE..=NOISE);
            }
        }
    }

    let inv_h2 = 1.0 / (cfg.dx * cfg.dx);
    let mut un = u.clone();
    let mut vn = v.clone();
    let mut su = Vec::with_capacity(cfg.n_steps / cfg.record_every);
    let mut sv = Vec::with_capacity(cfg.n_steps / cfg.record_every);

    for step in 1..=cfg.n_steps {
        for i in 0..n {
            let (im, ip) = ((i + n - 1) % n, (i + 1) % n);
            for j in 0..n {
                let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
                let k = i * n + j;
                let lap = |f: &[f64]| {
                    (f[im * n + j] + f[ip * n + j] + f[i * n + jm] + f[i * n + jp] - 4.0 * f[k])
                        * inv_h2
                };
                let (uc, vc) = (u[k], v[k]);
                let uvv = uc * vc * vc;
                un[k] = uc + cfg.dt * (cfg.du * lap(&u) - uvv + cfg.feed * (1.0 - uc));
                vn[k] = vc + cfg.dt * (cfg.dv * lap(&v) + uvv - (cfg.feed + cfg.kill) * vc);
            }
        }
        ensure_finite(&un, step, "Gray-Scott")?;
        ensure_finite(&vn, step, "Gray-Scott")?;
        std::mem::swap(&mut u, &mut un);
        std::mem::swap(&mut v, &mut vn);
        if step % cfg.record_every == 0 {
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
            dims: vec![n, n],
            spacing: vec![cfg.dx, cfg.dx],
        },
        dt_record,
        t0: dt_record,
        solver: Some(SolverSpec {
            scheme: "explicit-euler/5-point-laplacian",
            stability_ratio: cfg.du.max(cfg.dv) * cfg.dt * inv_h2,
            boundary: Boundary::Periodic,
            seed: cfg.perturb.then_some(cfg.seed),
        }),
    })
}
