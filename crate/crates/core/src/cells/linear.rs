use rand::Rng;

use crate::diffcore::{init_uniform, Tensor, Var};
use crate::{Error, Result};

/// Dense layer `y = x·W + b` with `W: [in, out]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Linear {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Linear {
    pub fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        Self {
            weight: init_uniform(&[inputs, outputs], inputs, rng),
            bias: init_uniform(&[outputs], inputs, rng),
        }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[inputs, outputs]),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[1]
    }

    /// Applies the layer to a batch `[rows, in]`.
    pub fn forward_batch<'t>(w: &Var<'t>, b: &Var<'t>, x: &Var<'t>) -> Result<Var<'t>> {
        x.matmul(w)?.add_row(b)
    }

    /// Applies the layer to a single vector.
    pub fn forward_vec<'t>(w: &Var<'t>, b: &Var<'t>, x: &Var<'t>) -> Result<Var<'t>> {
        let shape = x.shape();
        let [n] = shape[..] else {
            return Err(Error::dim(format!("expected a vector, got {shape:?}")));
        };
        let out = w.shape()[1];
        Self::forward_batch(w, b, &x.reshape(&[1, n])?)?.reshape(&[out])
    }

    /// Plain evaluation on a vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        super::check_len("dense input", x.len(), self.inputs())?;
        let row = Tensor::new(vec![1, x.len()], x.to_vec())?;
        let mut y = row.matmul(&self.weight)?.into_data();
        for (v, b) in y.iter_mut().zip(self.bias.data()) {
            *v += b;
        }
        Ok(y)
    }
}
