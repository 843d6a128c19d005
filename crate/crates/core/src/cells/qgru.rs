use std::f64::consts::PI;

use rand::Rng;

use super::{check_len, check_state, CellState, Linear, RecurrentCell, StateVars};
use crate::diffcore::{Tape, Tensor, Var};
use crate::qsim::{vqc_var, VqcConfig, VqcParams};
use crate::{Error, Result};

/// GRU cell with three variational circuits.
///
/// ```text
/// v  = [x_t, H_{t-1}]
/// r  = σ(VQC1(proj_v(v)))       z = σ(VQC2(proj_v(v)))
/// o  = [x_t, r∗H_{t-1}]         H̃ = tanh(VQC3(proj_o(o)))
/// H_t = z∗H_{t-1} + (1−z)∗H̃      y_t = head(H_t)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct QgruCell {
    pub config: VqcConfig,
    pub input_size: usize,
    pub output_size: usize,
    pub proj_v: Linear,
    pub proj_o: Linear,
    pub vqcs: [VqcParams; 3],
    pub head: Linear,
}

#[derive(Clone, Debug)]
pub struct QgruTrace {
    pub reset: Vec<f64>,
    pub update: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h: Vec<f64>,
    pub y: Vec<f64>,
}

struct StepVars<'t> {
    r: Var<'t>,
    z: Var<'t>,
    cand: Var<'t>,
    h: Var<'t>,
    y: Var<'t>,
}

impl QgruCell {
    pub fn new<R: Rng + ?Sized>(
        input_size: usize,
        output_size: usize,
        config: VqcConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if input_size == 0 || output_size == 0 {
            return Err(Error::config(
                "cell input and output sizes must be positive",
            ));
        }
        let n = config.n_qubits;
        Ok(Self {
            config,
            input_size,
            output_size,
            proj_v: Linear::new(input_size + n, n, rng),
            proj_o: Linear::new(input_size + n, n, rng),
            vqcs: std::array::from_fn(|_| VqcParams::random(&config, PI, rng)),
            head: Linear::new(n, output_size, rng),
        })
    }

    pub fn zeros(input_size: usize, output_size: usize, config: VqcConfig) -> Result<Self> {
        config.validate()?;
        if input_size == 0 || output_size == 0 {
            return Err(Error::config(
                "cell input and output sizes must be positive",
            ));
        }
        let n = config.n_qubits;
        Ok(Self {
            config,
            input_size,
            output_size,
            proj_v: Linear::zeros(input_size + n, n),
            proj_o: Linear::zeros(input_size + n, n),
            vqcs: std::array::from_fn(|_| VqcParams::zeros(&config)),
            head: Linear::zeros(n, output_size),
        })
    }

    pub fn with_hidden<R: Rng + ?Sized>(
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        config: VqcConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if hidden_size != config.n_qubits {
            return Err(Error::config(format!(
                "QGRU hidden size {hidden_size} must equal the qubit count {}",
                config.n_qubits
            )));
        }
        Self::new(input_size, output_size, config, rng)
    }

    fn forward<'t>(
        &self,
        p: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<StepVars<'t>> {
        check_len("parameter list", p.len(), 9)?;
        check_len("cell input", x.value().len(), self.input_size)?;
        check_state(state, self.config.n_qubits, false)?;
        let cfg = &self.config;
        let h_prev = state.h;

        let v = Var::concat(&[*x, h_prev], 0)?;
        let pv = Linear::forward_vec(&p[0], &p[1], &v)?;
        let r = vqc_var(&pv, &p[4], cfg)?.sigmoid()?;
        let z = vqc_var(&pv, &p[5], cfg)?.sigmoid()?;
        let o = Var::concat(&[*x, r.mul(&h_prev)?], 0)?;
        let po = Linear::forward_vec(&p[2], &p[3], &o)?;
        let cand = vqc_var(&po, &p[6], cfg)?.tanh()?;
        let h = blend(&z, &h_prev, &cand)?;
        let y = Linear::forward_vec(&p[7], &p[8], &h)?;
        Ok(StepVars { r, z, cand, h, y })
    }

    pub fn trace(&self, x: &[f64], state: &CellState) -> Result<QgruTrace> {
        let tape = Tape::new();
        let p = self.bind(&tape);
        let xv = tape.leaf(Tensor::vector(x));
        let s = self.forward(&p, &xv, &state.on(&tape))?;
        let val = |v: Var| v.value().into_data();
        Ok(QgruTrace {
            reset: val(s.r),
            update: val(s.z),
            candidate: val(s.cand),
            h: val(s.h),
            y: val(s.y),
        })
    }
}

/// `z∗prev + (1−z)∗cand`
fn blend<'t>(z: &Var<'t>, prev: &Var<'t>, cand: &Var<'t>) -> Result<Var<'t>> {
    z.mul(prev)?.add(&z.one_minus()?.mul(cand)?)
}

impl RecurrentCell for QgruCell {
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
        let mut v = vec![
            &self.proj_v.weight,
            &self.proj_v.bias,
            &self.proj_o.weight,
            &self.proj_o.bias,
        ];
        v.extend(self.vqcs.iter().map(|q| &q.0));
        v.extend([&self.head.weight, &self.head.bias]);
        v
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = vec![
            &mut self.proj_v.weight,
            &mut self.proj_v.bias,
            &mut self.proj_o.weight,
            &mut self.proj_o.bias,
        ];
        v.extend(self.vqcs.iter_mut().map(|q| &mut q.0));
        v.extend([&mut self.head.weight, &mut self.head.bias]);
        v
    }

    fn init_state(&self) -> CellState {
        CellState {
            h: vec![0.0; self.config.n_qubits],
            c: None,
        }
    }

    fn step_var<'t>(
        &self,
        params: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<(Var<'t>, StateVars<'t>)> {
        let s = self.forward(params, x, state)?;
        Ok((s.y, StateVars { h: s.h, c: None }))
    }
}
