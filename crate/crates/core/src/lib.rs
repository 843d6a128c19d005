//! Encoder-decoder quantum recurrent neural networks for time-dependent PDEs.
//!
//! The crate is a classical simulation stack:
//!
//! - [`diffcore`]: dense tensors, a reverse-mode tape and Adam.
//! - [`qsim`]: exact statevector simulation of the variational circuits
//!   (angle encoding, CNOT ring plus general rotations, Pauli-Z readout)
//!   with adjoint gradients.
//! - [`cells`]: LSTM, QLSTM (six circuits) and QGRU (three circuits) cells.
//! - [`autoencoder`]: the MLP encoder/decoder pair.
//! - [`pde`]: finite-difference generators for Burgers, Gray-Scott, HJB and
//!   3D Michaelis-Menten datasets.
//! - [`pipeline`]: normalization, windowing, training and metrics.
//! - [`container`] and [`config`]: on-disk formats used by the CLI.

pub mod autoencoder;
pub mod cells;
pub mod config;
pub mod container;
pub mod diffcore;
mod error;
pub mod pde;
pub mod pipeline;
pub mod qsim;

pub use error::{Error, Result};
