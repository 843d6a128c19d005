//! MLP encoder/decoder between flattened snapshots and the latent space.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cells::Linear;
use crate::diffcore::{Adam, AdamConfig, Tape, Tensor, Var};
use crate::{Error, Result};

/// Hidden widths of the encoder, outermost first. The decoder mirrors them.
pub const DEFAULT_LADDER: [usize; 4] = [4096, 2048, 1024, 512];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply<'t>(self, x: Var<'t>) -> Result<Var<'t>> {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => x.sigmoid(),
            Activation::Linear => Ok(x),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
    pub activations: Vec<Activation>,
}

impl Mlp {
    pub fn new<R: Rng + ?Sized>(
        dims: &[usize],
        activations: Vec<Activation>,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::config(format!("invalid layer widths {dims:?}")));
        }
        if activations.len() != dims.len() - 1 {
            return Err(Error::config("one activation per layer required"));
        }
        let layers = dims
            .windows(2)
            .map(|w| Linear::new(w[0], w[1], rng))
            .collect();
        Ok(Self {
            layers,
            activations,
        })
    }

    /// Widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs()];
        d.extend(self.layers.iter().map(|l| l.outputs()));
        d
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().expect("non-empty").outputs()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [&l.weight, &l.bias])
            .collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }

    /// Forward pass of a `[rows, input]` batch; `params` bound in
    /// [`Self::params`] order.
    pub fn forward_var<'t>(&self, params: &[Var<'t>], x: Var<'t>) -> Result<Var<'t>> {
        let mut h = x;
        for (k, act) in self.activations.iter().enumerate() {
            h = act.apply(Linear::forward_batch(
                &params[2 * k],
                &params[2 * k + 1],
                &h,
            )?)?;
        }
        Ok(h)
    }

    /// Forward pass on plain values, without recording a tape.
    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        let (_, cols) = batch.dims2()?;
        if cols != self.input_size() {
            return Err(Error::dim(format!(
                "batch has {cols} columns, network expects {}",
                self.input_size()
            )));
        }
        let mut h = batch.clone();
        for (layer, act) in self.layers.iter().zip(&self.activations) {
            h = h.matmul(&layer.weight)?;
            let (rows, n) = h.dims2()?;
            let data = h.data_mut();
            for r in 0..rows {
                for (v, b) in data[r * n..(r + 1) * n].iter_mut().zip(layer.bias.data()) {
                    *v += b;
                }
            }
            h = match act {
                Activation::Tanh => h.map(f64::tanh),
                Activation::Sigmoid => h.map(crate::diffcore::sigmoid),
                Activation::Linear => h,
            };
        }
        Ok(h)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Autoencoder {
    pub encoder: Mlp,
    pub decoder: Mlp,
}

impl Autoencoder {
    /// Encoder `n_input → ladder → latent` (tanh throughout); decoder
    /// `latent → reversed ladder → n_input` (tanh, then sigmoid output).
    pub fn new<R: Rng + ?Sized>(
        n_input: usize,
        ladder: &[usize],
        latent_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut enc_dims = vec![n_input];
        enc_dims.extend_from_slice(ladder);
        enc_dims.push(latent_size);
        let dec_dims: Vec<usize> = enc_dims.iter().rev().copied().collect();
        let depth = enc_dims.len() - 1;
        let encoder = Mlp::new(&enc_dims, vec![Activation::Tanh; depth], rng)?;
        let mut dec_acts = vec![Activation::Tanh; depth];
        dec_acts[depth - 1] = Activation::Sigmoid;
        let decoder = Mlp::new(&dec_dims, dec_acts, rng)?;
        Ok(Self { encoder, decoder })
    }

    pub fn input_size(&self) -> usize {
        self.encoder.input_size()
    }

    pub fn latent_size(&self) -> usize {
        self.encoder.output_size()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        let mut p = self.encoder.params();
        p.extend(self.decoder.params());
        p
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut p = self.encoder.params_mut();
        p.extend(self.decoder.params_mut());
        p
    }

    /// Encodes each row of `[rows, n_input]`.
    pub fn encode_batch(&self, x: &Tensor) -> Result<Tensor> {
        self.encoder.forward(x)
    }

    pub fn decode_batch(&self, z: &Tensor) -> Result<Tensor> {
        self.decoder.forward(z)
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("snapshot", x.len(), self.input_size())?;
        Ok(self
            .encode_batch(&Tensor::new(vec![1, x.len()], x.to_vec())?)?
            .into_data())
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len("latent vector", z.len(), self.latent_size())?;
        Ok(self
            .decode_batch(&Tensor::new(vec![1, z.len()], z.to_vec())?)?
            .into_data())
    }

    /// Mean squared reconstruction error of a batch, recorded on `params`' tape.
    pub fn loss_var<'t>(&self, params: &[Var<'t>], batch: Var<'t>) -> Result<Var<'t>> {
        let n_enc = self.encoder.layers.len() * 2;
        let z = self.encoder.forward_var(&params[..n_enc], batch)?;
        let out = self.decoder.forward_var(&params[n_enc..], z)?;
        out.mse(&batch)
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::dim(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AeTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for AeTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            adam: AdamConfig::with_learning_rate(1e-3),
            seed: 0,
        }
    }
}

/// Minimizes reconstruction MSE with Adam over shuffled mini-batches.
/// Returns the mean training loss of each epoch.
pub fn train_autoencoder(
    ae: &mut Autoencoder,
    snapshots: &[Vec<f64>],
    cfg: &AeTrainConfig,
) -> Result<Vec<f64>> {
    if snapshots.is_empty() {
        return Err(Error::contract("autoencoder training set is empty"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::config("batch size must be positive"));
    }
    let n = ae.input_size();
    for s in snapshots {
        check_len("snapshot", s.len(), n)?;
        if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::contract(
                "autoencoder inputs must be normalized to [0, 1]",
            ));
        }
    }

    let mut adam = Adam::new(cfg.adam, ae.params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..snapshots.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let mut data = Vec::with_capacity(chunk.len() * n);
            for &i in chunk {
                data.extend_from_slice(&snapshots[i]);
            }
            let batch = Tensor::new(vec![chunk.len(), n], data)?;
            let tape = Tape::new();
            let params = tape.leaves(ae.params());
            let loss = ae.loss_var(&params, tape.leaf(batch))?;
            let value = loss.value().item();
            if !value.is_finite() {
                return Err(Error::Divergence(format!(
                    "autoencoder loss is {value} in epoch {epoch}"
                )));
            }
            total += value * chunk.len() as f64;
            let grads = tape.backward(loss)?.wrt_all(&params);
            adam.step(&mut ae.params_mut(), &grads)?;
        }
        history.push(total / snapshots.len() as f64);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> Autoencoder {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Autoencoder::new(12, &[10, 6], 3, &mut rng).unwrap()
    }

    #[test]
    fn shapes_and_ranges() {
        let ae = small(0);
        assert_eq!(ae.decoder.dims(), vec![3, 6, 10, 12]);
        let x: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        let z = ae.encode(&x).unwrap();
        assert_eq!(z.len(), 3);
        assert!(z.iter().all(|v| v.abs() < 1.0));
        let xr = ae.decode(&[50.0, -50.0, 3.0]).unwrap();
        assert_eq!(xr.len(), 12);
        assert!(xr.iter().all(|v| *v > 0.0 && *v < 1.0));
    }

    #[test]
    fn zero_weights_encode_zero() {
        let mut ae = small(1);
        for p in ae.params_mut() {
            p.data_mut().fill(0.0);
        }
        assert_eq!(ae.encode(&[0.0; 12]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn length_mismatch() {
        let ae = small(0);
        assert!(matches!(ae.encode(&[0.0; 5]), Err(Error::Dimension(_))));
        assert!(matches!(ae.decode(&[0.0; 4]), Err(Error::Dimension(_))));
    }

    #[test]
    fn zero_epochs_changes_nothing() {
        let mut ae = small(2);
        let before = ae.clone();
        let cfg = AeTrainConfig {
            epochs: 0,
            ..Default::default()
        };
        let hist = train_autoencoder(&mut ae, &[vec![0.5; 12]], &cfg).unwrap();
        assert!(hist.is_empty());
        assert_eq!(ae, before);
    }

    #[test]
    fn empty_or_unnormalized_data_rejected() {
        let mut ae = small(2);
        let cfg = AeTrainConfig::default();
        assert!(matches!(
            train_autoencoder(&mut ae, &[], &cfg),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            train_autoencoder(&mut ae, &[vec![1.5; 12]], &cfg),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn overfits_one_snapshot() {
        let mut ae = small(3);
        let x: Vec<f64> = (0..12)
            .map(|i| 0.2 + 0.6 * ((i as f64) * 0.7).sin().abs())
            .collect();
        let cfg = AeTrainConfig {
            epochs: 200,
            batch_size: 1,
            adam: AdamConfig::with_learning_rate(1e-2),
            seed: 0,
        };
        let hist = train_autoencoder(&mut ae, std::slice::from_ref(&x), &cfg).unwrap();
        assert_eq!(hist.len(), 200);
        let out = ae.decode(&ae.encode(&x).unwrap()).unwrap();
        let mse: f64 = out
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / 12.0;
        assert!(mse < 1e-4, "mse = {mse}");
    }
}
