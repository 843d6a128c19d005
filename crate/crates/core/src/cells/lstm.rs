use rand::Rng;

use super::{check_len, check_state, CellState, Linear, RecurrentCell, StateVars};
use crate::diffcore::{Tensor, Var};
use crate::{Error, Result};

/// Classical LSTM baseline. Gates read `v = [h_{t-1}, x_t]`:
/// `f, i, o = σ(W·v + b)`, `g = tanh(W·v + b)`, `c_t = f∗c + i∗g`,
/// `h_t = o∗tanh(c_t)`, `y_t = head(h_t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    pub input_size: usize,
    pub hidden_size: usize,
    pub output_size: usize,
    pub forget: Linear,
    pub input: Linear,
    pub candidate: Linear,
    pub output: Linear,
    pub head: Linear,
}

impl LstmCell {
    pub fn new<R: Rng + ?Sized>(
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if input_size == 0 || hidden_size == 0 || output_size == 0 {
            return Err(Error::config("LSTM sizes must be positive"));
        }
        let v = hidden_size + input_size;
        Ok(Self {
            input_size,
            hidden_size,
            output_size,
            forget: Linear::new(v, hidden_size, rng),
            input: Linear::new(v, hidden_size, rng),
            candidate: Linear::new(v, hidden_size, rng),
            output: Linear::new(v, hidden_size, rng),
            head: Linear::new(hidden_size, output_size, rng),
        })
    }

    pub fn zeros(input_size: usize, hidden_size: usize, output_size: usize) -> Result<Self> {
        if input_size == 0 || hidden_size == 0 || output_size == 0 {
            return Err(Error::config("LSTM sizes must be positive"));
        }
        let v = hidden_size + input_size;
        Ok(Self {
            input_size,
            hidden_size,
            output_size,
            forget: Linear::zeros(v, hidden_size),
            input: Linear::zeros(v, hidden_size),
            candidate: Linear::zeros(v, hidden_size),
            output: Linear::zeros(v, hidden_size),
            head: Linear::zeros(hidden_size, output_size),
        })
    }
}

impl RecurrentCell for LstmCell {
    fn input_size(&self) -> usize {
        self.input_size
    }

    fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    fn output_size(&self) -> usize {
        self.output_size
    }

    fn params(&self) -> Vec<&Tensor> {
        [
            &self.forget,
            &self.input,
            &self.candidate,
            &self.output,
            &self.head,
        ]
        .into_iter()
        .flat_map(|l| [&l.weight, &l.bias])
        .collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        [
            &mut self.forget,
            &mut self.input,
            &mut self.candidate,
            &mut self.output,
            &mut self.head,
        ]
        .into_iter()
        .flat_map(|l| [&mut l.weight, &mut l.bias])
        .collect()
    }

    fn init_state(&self) -> CellState {
        CellState {
            h: vec![0.0; self.hidden_size],
            c: Some(vec![0.0; self.hidden_size]),
        }
    }

    fn step_var<'t>(
        &self,
        p: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<(Var<'t>, StateVars<'t>)> {
        check_len("parameter list", p.len(), 10)?;
        check_len("cell input", x.value().len(), self.input_size)?;
        check_state(state, self.hidden_size, true)?;
        let c_prev = state.c.expect("checked");

        let v = Var::concat(&[state.h, *x], 0)?;
        let f = Linear::forward_vec(&p[0], &p[1], &v)?.sigmoid()?;
        let i = Linear::forward_vec(&p[2], &p[3], &v)?.sigmoid()?;
        let g = Linear::forward_vec(&p[4], &p[5], &v)?.tanh()?;
        let o = Linear::forward_vec(&p[6], &p[7], &v)?.sigmoid()?;
        let c = f.mul(&c_prev)?.add(&i.mul(&g)?)?;
        let h = o.mul(&c.tanh()?)?;
        let y = Linear::forward_vec(&p[8], &p[9], &h)?;
        Ok((y, StateVars { h, c: Some(c) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cell_zero_state() {
        let cell = LstmCell::zeros(3, 4, 2).unwrap();
        let (y, s) = cell.step(&[0.0; 3], &cell.init_state()).unwrap();
        assert_eq!(s.h, vec![0.0; 4]);
        assert_eq!(y, vec![0.0; 2]);
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut cell = LstmCell::zeros(2, 3, 1).unwrap();
        cell.forget.bias.data_mut().fill(50.0);
        cell.input.bias.data_mut().fill(-50.0);
        let state = CellState {
            h: vec![0.1, -0.2, 0.3],
            c: Some(vec![1.5, -0.25, 0.75]),
        };
        let (_, next) = cell.step(&[0.4, -0.6], &state).unwrap();
        for (a, b) in next.c.unwrap().iter().zip(state.c.unwrap()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
