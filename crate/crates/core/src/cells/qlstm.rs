use std::f64::consts::PI;

use rand::Rng;

use super::{check_len, check_state, CellState, Linear, RecurrentCell, StateVars};
use crate::diffcore::{Tape, Tensor, Var};
use crate::qsim::{vqc_var, VqcConfig, VqcParams};
use crate::{Error, Result};

/// LSTM cell whose six transformations are variational circuits.
///
/// ```text
/// v  = [h_{t-1}, x_t]          u = proj(v)
/// f  = σ(VQC1(u))              i = σ(VQC2(u))
/// C̃  = tanh(VQC3(u))           c_t = f∗c_{t-1} + i∗C̃
/// o  = σ(VQC4(u))              h_t = VQC5(o∗tanh c_t)
/// ỹ  = VQC6(o∗tanh c_t)        y_t = head(ỹ)
/// ```
///
/// The hidden size equals the qubit count.
#[derive(Clone, Debug, PartialEq)]
pub struct QlstmCell {
    pub config: VqcConfig,
    pub input_size: usize,
    pub output_size: usize,
    pub proj: Linear,
    pub vqcs: [VqcParams; 6],
    pub head: Linear,
}

/// Every intermediate of one QLSTM step.
#[derive(Clone, Debug)]
pub struct QlstmTrace {
    pub forget: Vec<f64>,
    pub input: Vec<f64>,
    pub candidate: Vec<f64>,
    pub output_gate: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub y: Vec<f64>,
}

struct StepVars<'t> {
    f: Var<'t>,
    i: Var<'t>,
    cand: Var<'t>,
    o: Var<'t>,
    c: Var<'t>,
    h: Var<'t>,
    y_tilde: Var<'t>,
    y: Var<'t>,
}

impl QlstmCell {
    pub fn new<R: Rng + ?Sized>(
        input_size: usize,
        output_size: usize,
        config: VqcConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        Self::check_sizes(input_size, output_size)?;
        let n = config.n_qubits;
        let proj = Linear::new(n + input_size, n, rng);
        let vqcs = std::array::from_fn(|_| VqcParams::random(&config, PI, rng));
        let head = Linear::new(n, output_size, rng);
        Ok(Self {
            config,
            input_size,
            output_size,
            proj,
            vqcs,
            head,
        })
    }

    /// All weights and angles zero.
    pub fn zeros(input_size: usize, output_size: usize, config: VqcConfig) -> Result<Self> {
        config.validate()?;
        Self::check_sizes(input_size, output_size)?;
        let n = config.n_qubits;
        Ok(Self {
            config,
            input_size,
            output_size,
            proj: Linear::zeros(n + input_size, n),
            vqcs: std::array::from_fn(|_| VqcParams::zeros(&config)),
            head: Linear::zeros(n, output_size),
        })
    }

    /// Requires `hidden_size == config.n_qubits`.
    pub fn with_hidden<R: Rng + ?Sized>(
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        config: VqcConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden_size != config.n_qubits {
            return Err(Error::config(format!(
                "QLSTM hidden size {hidden_size} must equal the qubit count {}",
                config.n_qubits
            )));
        }
        Self::new(input_size, output_size, config, rng)
    }

    fn check_sizes(input_size: usize, output_size: usize) -> Result<()> {
        if input_size == 0 || output_size == 0 {
            return Err(Error::config(
                "cell input and output sizes must be positive",
            ));
        }
        Ok(())
    }

    fn forward<'t>(
        &self,
        p: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<StepVars<'t>> {
        check_len("parameter list", p.len(), 10)?;
        check_len("cell input", x.value().len(), self.input_size)?;
        check_state(state, self.config.n_qubits, true)?;
        let c_prev = state.c.expect("checked");
        let cfg = &self.config;

        let v = Var::concat(&[state.h, *x], 0)?;
        let u = Linear::forward_vec(&p[0], &p[1], &v)?;
        let f = vqc_var(&u, &p[2], cfg)?.sigmoid()?;
        let i = vqc_var(&u, &p[3], cfg)?.sigmoid()?;
        let cand = vqc_var(&u, &p[4], cfg)?.tanh()?;
        let c = f.mul(&c_prev)?.add(&i.mul(&cand)?)?;
        let o = vqc_var(&u, &p[5], cfg)?.sigmoid()?;
        let gated = o.mul(&c.tanh()?)?;
        let h = vqc_var(&gated, &p[6], cfg)?;
        let y_tilde = vqc_var(&gated, &p[7], cfg)?;
        let y = Linear::forward_vec(&p[8], &p[9], &y_tilde)?;
        Ok(StepVars {
            f,
            i,
            cand,
            o,
            c,
            h,
            y_tilde,
            y,
        })
    }

    /// Evaluates one step and returns every intermediate.
    pub fn trace(&self, x: &[f64], state: &CellState) -> Result<QlstmTrace> {
        let tape = Tape::new();
        let p = self.bind(&tape);
        let xv = tape.leaf(Tensor::vector(x));
        let s = self.forward(&p, &xv, &state.on(&tape))?;
        let val = |v: Var| v.value().into_data();
        Ok(QlstmTrace {
            forget: val(s.f),
            input: val(s.i),
            candidate: val(s.cand),
            output_gate: val(s.o),
            c: val(s.c),
            h: val(s.h),
            y_tilde: val(s.y_tilde),
            y: val(s.y),
        })
    }
}

impl RecurrentCell for QlstmCell {
    fn input_size(&self) -> usize {
        self.input_size
    }

    fn hidden_size(&self) -> usize {
        self.config.n_qubits
    }

    fn output_size(&self) -> usize {
        self.output_size
    }

    fn params(&self) -> Vec<&Tensor> {
        let mut v = vec![&self.proj.weight, &self.proj.bias];
        v.extend(self.vqcs.iter().map(|q| &q.0));
        v.extend([&self.head.weight, &self.head.bias]);
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = vec![&mut self.proj.weight, &mut self.proj.bias];
        v.extend(self.vqcs.iter_mut().map(|q| &mut q.0));
        v.extend([&mut self.head.weight, &mut self.head.bias]);
        v
    }

    fn init_state(&self) -> CellState {
        let n = self.config.n_qubits;
        CellState {
            h: vec![0.0; n],
            c: Some(vec![0.0; n]),
        }
    }

    fn step_var<'t>(
        &self,
        params: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<(Var<'t>, StateVars<'t>)> {
        let s = self.forward(params, x, state)?;
        Ok((
            s.y,
            StateVars {
                h: s.h,
                c: Some(s.c),
            },
        ))
    }
}
