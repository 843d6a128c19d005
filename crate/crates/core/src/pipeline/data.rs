use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Global min and max of one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormStats {
    pub min: f64,
    pub max: f64,
}

impl NormStats {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::contract(format!(
                "normalization needs max > min, got min {min}, max {max}"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn fit<'a>(snapshots: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in snapshots {
            for &v in s {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo == f64::INFINITY {
            return Err(Error::contract("cannot normalize an empty field"));
        }
        Self::new(lo, hi)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let range = self.max - self.min;
        x.iter().map(|v| (v - self.min) / range).collect()
    }

    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        let range = self.max - self.min;
        x.iter().map(|v| v * range + self.min).collect()
    }
}

/// Min-max scales all snapshots into `[0, 1]` with one global range.
pub fn normalize(snapshots: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, NormStats)> {
    let stats = NormStats::fit(snapshots.iter().map(Vec::as_slice))?;
    Ok((snapshots.iter().map(|s| stats.apply(s)).collect(), stats))
}

pub fn denormalize(snapshots: &[Vec<f64>], stats: &NormStats) -> Vec<Vec<f64>> {
    snapshots.iter().map(|s| stats.invert(s)).collect()
}

/// Sliding windows with one-step-ahead targets. Sample `i` reads
/// `latents[starts[i] .. starts[i] + L]` and predicts `latents[starts[i] + L]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedSet {
    pub inputs: Vec<Vec<Vec<f64>>>,
    pub targets: Vec<Vec<f64>>,
    pub starts: Vec<usize>,
    pub window_length: usize,
}

impl WindowedSet {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Index of each target in the source sequence.
    pub fn target_indices(&self) -> Vec<usize> {
        self.starts.iter().map(|s| s + self.window_length).collect()
    }

    pub fn subset(&self, ids: &[usize]) -> Self {
        Self {
            inputs: ids.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: ids.iter().map(|&i| self.targets[i].clone()).collect(),
            starts: ids.iter().map(|&i| self.starts[i]).collect(),
            window_length: self.window_length,
        }
    }
}

pub fn window_count(n_t: usize, window_length: usize) -> Result<usize> {
    if window_length == 0 {
        return Err(Error::contract("window length must be at least 1"));
    }
    if n_t <= window_length {
        return Err(Error::contract(format!(
            "{n_t} time steps cannot form a window of length {window_length} plus a target"
        )));
    }
    Ok(n_t - window_length)
}

pub fn make_windows(latents: &[Vec<f64>], window_length: usize) -> Result<WindowedSet> {
    let n = window_count(latents.len(), window_length)?;
    Ok(WindowedSet {
        inputs: (0..n)
            .map(|i| latents[i..i + window_length].to_vec())
            .collect(),
        targets: (0..n).map(|i| latents[i + window_length].clone()).collect(),
        starts: (0..n).collect(),
        window_length,
    })
}

/// Seeded shuffle of `0..n` cut at `round(ratio · n)`.
pub fn split_indices(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::config(format!(
            "split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    let n_train = (ratio * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::contract(format!(
            "{n} samples at ratio {ratio} leave one side of the split empty"
        )));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = ids.split_off(n_train);
    Ok((ids, test))
}

pub fn split(set: &WindowedSet, ratio: f64, seed: u64) -> Result<(WindowedSet, WindowedSet)> {
    let (train, test) = split_indices(set.len(), ratio, seed)?;
    Ok((set.subset(&train), set.subset(&test)))
}
