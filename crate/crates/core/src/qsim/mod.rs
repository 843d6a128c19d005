//! Exact statevector simulation of variational quantum circuits.
//!
//! A circuit angle-encodes an `n`-vector (`H`, `RY(atan x)`, `RZ(atan x²)`
//! per qubit), applies `L` blocks of CNOT entanglers followed by general
//! rotations, and reads out `⟨Z⟩` on every qubit. Gradients come from
//! adjoint differentiation and are exact up to rounding.

mod circuit;
mod state;

pub use circuit::{
    apply_variational_layers, encode_input, vqc_forward, vqc_gradients, vqc_state, vqc_var,
    Entanglement, VqcConfig, VqcParams,
};
pub use state::{Gate, StateVector, MAX_QUBITS};
