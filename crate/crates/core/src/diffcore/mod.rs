//! Dense tensors, reverse-mode differentiation and Adam.
//!
//! Values live in [`Tensor`]; a forward pass that needs gradients records
//! [`Var`] handles on a [`Tape`] and calls [`Tape::backward`] on a scalar.

mod adam;
mod tape;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use tape::{CustomOp, Gradients, Tape, Var};
pub use tensor::Tensor;

pub(crate) use tape::sigmoid;

use rand::Rng;

/// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
pub fn init_uniform<R: Rng + ?Sized>(shape: &[usize], fan_in: usize, rng: &mut R) -> Tensor {
    Tensor::uniform(shape, 1.0 / (fan_in as f64).sqrt(), rng)
}
