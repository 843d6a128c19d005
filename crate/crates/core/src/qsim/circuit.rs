use std::rc::Rc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{Gate, StateVector, MAX_QUBITS};
use crate::diffcore::{CustomOp, Tensor, Var};
use crate::{Error, Result};

/// Wiring of the CNOTs at the start of each variational layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entanglement {
    /// `i -> (i + 1) mod n` for every qubit.
    #[default]
    Ring,
    /// `i -> i + 1` for `i < n - 1`.
    Linear,
}

impl Entanglement {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Ring => (0..n_qubits).map(|i| (i, (i + 1) % n_qubits)).collect(),
            Entanglement::Linear => (0..n_qubits.saturating_sub(1))
                .map(|i| (i, i + 1))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqcConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub entanglement: Entanglement,
}

impl Default for VqcConfig {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            n_layers: 4,
            entanglement: Entanglement::Ring,
        }
    }
}

impl VqcConfig {
    pub fn new(n_qubits: usize, n_layers: usize) -> Result<Self> {
        let cfg = Self {
            n_qubits,
            n_layers,
            entanglement: Entanglement::Ring,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "n_qubits = {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.n_qubits < 2 {
            return Err(Error::config("entangling layers need at least 2 qubits"));
        }
        if self.n_layers == 0 {
            return Err(Error::config("n_layers must be positive"));
        }
        Ok(())
    }

    pub fn param_shape(&self) -> [usize; 3] {
        [self.n_layers, self.n_qubits, 3]
    }

    pub fn param_count(&self) -> usize {
        self.n_layers * self.n_qubits * 3
    }
}

/// Rotation angles `(alpha, beta, gamma)` per layer and qubit, stored as a
/// `[layers, qubits, 3]` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct VqcParams(pub Tensor);

impl VqcParams {
    pub fn zeros(config: &VqcConfig) -> Self {
        Self(Tensor::zeros(&config.param_shape()))
    }

    /// Uniform angles in `[-bound, bound]`.
    pub fn random<R: Rng + ?Sized>(config: &VqcConfig, bound: f64, rng: &mut R) -> Self {
        Self(Tensor::uniform(&config.param_shape(), bound, rng))
    }

    pub fn from_tensor(t: Tensor, config: &VqcConfig) -> Result<Self> {
        let p = Self(t);
        p.check(config)?;
        Ok(p)
    }

    pub fn check(&self, config: &VqcConfig) -> Result<()> {
        if self.0.shape() != config.param_shape() {
            return Err(Error::dim(format!(
                "circuit parameters {:?}, config needs {:?}",
                self.0.shape(),
                config.param_shape()
            )));
        }
        if !self.0.is_finite() {
            return Err(Error::contract("non-finite circuit parameter"));
        }
        Ok(())
    }

    /// `(alpha, beta, gamma)` of one layer/qubit.
    pub fn angles(&self, layer: usize, qubit: usize) -> (f64, f64, f64) {
        let n = self.0.shape()[1];
        let i = (layer * n + qubit) * 3;
        let d = self.0.data();
        (d[i], d[i + 1], d[i + 2])
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }
}

/// Where a rotation angle comes from, for routing its gradient.
#[derive(Clone, Copy, Debug)]
enum Source {
    Param(usize),
    EncodeY(usize),
    EncodeZ(usize),
}

#[derive(Clone, Copy, Debug)]
enum Step {
    H(usize),
    Ry(usize, f64, Source),
    Rz(usize, f64, Source),
    Cnot(usize, usize),
}

fn check_input(x: &[f64], config: &VqcConfig) -> Result<()> {
    if x.len() != config.n_qubits {
        return Err(Error::dim(format!(
            "{} inputs for a {}-qubit circuit",
            x.len(),
            config.n_qubits
        )));
    }
    Ok(())
}

fn encoding_steps(x: &[f64], steps: &mut Vec<Step>) {
    for (q, &xi) in x.iter().enumerate() {
        steps.push(Step::H(q));
        steps.push(Step::Ry(q, xi.atan(), Source::EncodeY(q)));
        steps.push(Step::Rz(q, (xi * xi).atan(), Source::EncodeZ(q)));
    }
}

fn variational_steps(params: &VqcParams, config: &VqcConfig, steps: &mut Vec<Step>) {
    let n = config.n_qubits;
    let pairs = config.entanglement.pairs(n);
    for layer in 0..config.n_layers {
        for &(c, t) in &pairs {
            steps.push(Step::Cnot(c, t));
        }
        for q in 0..n {
            let (a, b, g) = params.angles(layer, q);
            let base = (layer * n + q) * 3;
            steps.push(Step::Rz(q, a, Source::Param(base)));
            steps.push(Step::Ry(q, b, Source::Param(base + 1)));
            steps.push(Step::Rz(q, g, Source::Param(base + 2)));
        }
    }
}

fn run_steps(state: &mut StateVector, steps: &[Step]) {
    for step in steps {
        match *step {
            Step::H(q) => state.apply_1q(q, &super::state::hadamard()),
            Step::Ry(q, t, _) => state.apply_1q(q, &super::state::ry(t)),
            Step::Rz(q, t, _) => state.apply_rz(q, t),
            Step::Cnot(c, t) => state.apply_cnot(c, t),
        }
    }
}

/// Angle-encodes `x` into a fresh register: per qubit `H`, then
/// `RY(atan x_i)`, then `RZ(atan x_i²)`.
pub fn encode_input(state: &mut StateVector, x: &[f64]) -> Result<()> {
    if *state != StateVector::zero(state.n_qubits())? {
        return Err(Error::contract("encoding expects the all-zero register"));
    }
    if x.len() != state.n_qubits() {
        return Err(Error::dim(format!(
            "{} inputs for a {}-qubit register",
            x.len(),
            state.n_qubits()
        )));
    }
    for (q, &xi) in x.iter().enumerate() {
        state.apply(Gate::H(q))?;
        state.apply(Gate::Ry(q, xi.atan()))?;
        state.apply(Gate::Rz(q, (xi * xi).atan()))?;
    }
    Ok(())
}

/// Applies the `L` variational blocks: CNOT pattern, then `ROT` per qubit.
pub fn apply_variational_layers(
    state: &mut StateVector,
    params: &VqcParams,
    config: &VqcConfig,
) -> Result<()> {
    params.check(config)?;
    if state.n_qubits() != config.n_qubits {
        return Err(Error::dim(format!(
            "{}-qubit state for a {}-qubit circuit",
            state.n_qubits(),
            config.n_qubits
        )));
    }
    let pairs = config.entanglement.pairs(config.n_qubits);
    for layer in 0..config.n_layers {
        for &(control, target) in &pairs {
            state.apply(Gate::Cnot { control, target })?;
        }
        for q in 0..config.n_qubits {
            let (a, b, g) = params.angles(layer, q);
            state.apply(Gate::Rot(q, a, b, g))?;
        }
    }
    Ok(())
}

fn build(x: &[f64], params: &VqcParams, config: &VqcConfig) -> Result<Vec<Step>> {
    config.validate()?;
    check_input(x, config)?;
    params.check(config)?;
    let mut steps =
        Vec::with_capacity(3 * config.n_qubits * (1 + config.n_layers) + 4 * config.n_layers);
    encoding_steps(x, &mut steps);
    variational_steps(params, config, &mut steps);
    Ok(steps)
}

/// Final register state of the full circuit.
pub fn vqc_state(x: &[f64], params: &VqcParams, config: &VqcConfig) -> Result<StateVector> {
    let steps = build(x, params, config)?;
    let mut state = StateVector::zero(config.n_qubits)?;
    run_steps(&mut state, &steps);
    Ok(state)
}

/// Per-qubit Pauli-Z expectations of the circuit applied to `|0…0⟩`.
pub fn vqc_forward(x: &[f64], params: &VqcParams, config: &VqcConfig) -> Result<Vec<f64>> {
    let state = vqc_state(x, params, config)?;
    Ok((0..config.n_qubits)
        .map(|q| state.expectation_z_unchecked(q))
        .collect())
}

/// Gradients of `upstream · vqc_forward(x, params)` with respect to the
/// circuit parameters and to `x`, by adjoint differentiation.
pub fn vqc_gradients(
    x: &[f64],
    params: &VqcParams,
    config: &VqcConfig,
    upstream: &[f64],
) -> Result<(Tensor, Vec<f64>)> {
    if upstream.len() != config.n_qubits {
        return Err(Error::dim(format!(
            "{} upstream values for {} outputs",
            upstream.len(),
            config.n_qubits
        )));
    }
    let steps = build(x, params, config)?;
    let mut phi = StateVector::zero(config.n_qubits)?;
    run_steps(&mut phi, &steps);

    // lambda = M|psi> with M = sum_q upstream_q Z_q (diagonal).
    let mut lambda = phi.clone();
    let masks: Vec<usize> = (0..config.n_qubits).map(|q| phi.mask(q)).collect();
    for (i, a) in lambda.amplitudes_mut().iter_mut().enumerate() {
        let w: f64 = masks
            .iter()
            .zip(upstream)
            .map(|(&m, &g)| if i & m == 0 { g } else { -g })
            .sum();
        *a *= w;
    }

    let mut grad_params = vec![0.0; config.param_count()];
    let mut grad_y = vec![0.0; config.n_qubits];
    let mut grad_z = vec![0.0; config.n_qubits];
    let mut scratch = phi.clone();

    for step in steps.iter().rev() {
        // For U = exp(-i t G / 2): dL/dt = Im <lambda| G |phi_after>.
        let (q, theta, src, is_y) = match *step {
            Step::H(q) => {
                phi.apply_1q(q, &super::state::hadamard());
                lambda.apply_1q(q, &super::state::hadamard());
                continue;
            }
            Step::Cnot(c, t) => {
                phi.apply_cnot(c, t);
                lambda.apply_cnot(c, t);
                continue;
            }
            Step::Ry(q, t, s) => (q, t, s, true),
            Step::Rz(q, t, s) => (q, t, s, false),
        };
        scratch.amplitudes_mut().copy_from_slice(phi.amplitudes());
        let g = if is_y {
            scratch.apply_1q(q, &pauli_y());
            lambda.inner(&scratch).im
        } else {
            apply_pauli_z(&mut scratch, q);
            lambda.inner(&scratch).im
        };
        match src {
            Source::Param(i) => grad_params[i] += g,
            Source::EncodeY(i) => grad_y[i] += g,
            Source::EncodeZ(i) => grad_z[i] += g,
        }
        if is_y {
            let inv = super::state::ry(-theta);
            phi.apply_1q(q, &inv);
            lambda.apply_1q(q, &inv);
        } else {
            phi.apply_rz(q, -theta);
            lambda.apply_rz(q, -theta);
        }
    }

    let grad_x = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let x2 = xi * xi;
            grad_y[i] / (1.0 + x2) + grad_z[i] * 2.0 * xi / (1.0 + x2 * x2)
        })
        .collect();
    Ok((
        Tensor::new(config.param_shape().to_vec(), grad_params)?,
        grad_x,
    ))
}

fn pauli_y() -> [[num_complex::Complex64; 2]; 2] {
    use num_complex::Complex64 as C;
    [
        [C::new(0.0, 0.0), C::new(0.0, -1.0)],
        [C::new(0.0, 1.0), C::new(0.0, 0.0)],
    ]
}

fn apply_pauli_z(state: &mut StateVector, q: usize) {
    let m = state.mask(q);
    for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
        if i & m != 0 {
            *a = -*a;
        }
    }
}

/// Tape node for one circuit evaluation. Inputs: `x` (length `n_qubits`)
/// and the `[layers, qubits, 3]` parameter tensor.
#[derive(Debug)]
struct VqcOp {
    config: VqcConfig,
}

impl CustomOp for VqcOp {
    fn backward(
        &self,
        inputs: &[&Tensor],
        _output: &Tensor,
        upstream: &Tensor,
    ) -> Result<Vec<Tensor>> {
        let params = VqcParams(inputs[1].clone());
        let (gp, gx) = vqc_gradients(inputs[0].data(), &params, &self.config, upstream.data())?;
        Ok(vec![Tensor::new(inputs[0].shape().to_vec(), gx)?, gp])
    }
}

/// Records a circuit evaluation on the tape of `x`.
pub fn vqc_var<'t>(x: &Var<'t>, params: &Var<'t>, config: &VqcConfig) -> Result<Var<'t>> {
    let xv = x.value();
    if xv.rank() != 1 {
        return Err(Error::dim(format!(
            "circuit input must be a vector, got {:?}",
            xv.shape()
        )));
    }
    let p = VqcParams(params.value());
    let out = vqc_forward(xv.data(), &p, config)?;
    x.tape().custom(
        Rc::new(VqcOp { config: *config }),
        &[*x, *params],
        Tensor::vector(&out),
    )
}
