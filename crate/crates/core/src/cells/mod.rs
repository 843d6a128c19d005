//! Recurrent cells: classical LSTM, QLSTM (six circuits) and QGRU (three
//! circuits), plus stacking.
//!
//! Every cell implements [`RecurrentCell`]; its step is written once against
//! the tape so plain evaluation and backpropagation through time share a
//! single code path.

mod linear;
mod lstm;
mod qgru;
mod qlstm;
mod stack;

pub use linear::Linear;
pub use lstm::LstmCell;
pub use qgru::{QgruCell, QgruTrace};
pub use qlstm::{QlstmCell, QlstmTrace};
pub use stack::{Cell, CellKind, StackedRnn};

use crate::diffcore::{Tape, Tensor, Var};
use crate::{Error, Result};

/// Recurrent memory. `c` is present for LSTM-type cells only; for the QGRU
/// `h` holds the hidden state `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Option<Vec<f64>>,
}

/// [`CellState`] recorded on a tape.
#[derive(Clone, Copy, Debug)]
pub struct StateVars<'t> {
    pub h: Var<'t>,
    pub c: Option<Var<'t>>,
}

impl CellState {
    pub fn on<'t>(&self, tape: &'t Tape) -> StateVars<'t> {
        StateVars {
            h: tape.leaf(Tensor::vector(&self.h)),
            c: self.c.as_ref().map(|c| tape.leaf(Tensor::vector(c))),
        }
    }
}

impl StateVars<'_> {
    pub fn value(&self) -> CellState {
        CellState {
            h: self.h.value().into_data(),
            c: self.c.map(|c| c.value().into_data()),
        }
    }
}

/// Shared interface of the recurrent cells.
pub trait RecurrentCell {
    fn input_size(&self) -> usize;
    fn hidden_size(&self) -> usize;
    fn output_size(&self) -> usize;

    /// Trainable tensors in a fixed order.
    fn params(&self) -> Vec<&Tensor>;
    fn params_mut(&mut self) -> Vec<&mut Tensor>;

    /// Zero state.
    fn init_state(&self) -> CellState;

    /// One step on the tape. `params` are leaves bound from [`Self::params`]
    /// in the same order.
    fn step_var<'t>(
        &self,
        params: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<(Var<'t>, StateVars<'t>)>;

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn bind<'t>(&self, tape: &'t Tape) -> Vec<Var<'t>> {
        tape.leaves(self.params())
    }

    /// One step on plain values.
    fn step(&self, x: &[f64], state: &CellState) -> Result<(Vec<f64>, CellState)> {
        check_len("cell input", x.len(), self.input_size())?;
        let tape = Tape::new();
        let p = self.bind(&tape);
        let xv = tape.leaf(Tensor::vector(x));
        let (y, next) = self.step_var(&p, &xv, &state.on(&tape))?;
        Ok((y.value().into_data(), next.value()))
    }

    /// Folds the step over a window and returns the last output.
    fn run_sequence_var<'t>(
        &self,
        params: &[Var<'t>],
        xs: &[Var<'t>],
        init: &StateVars<'t>,
    ) -> Result<Var<'t>> {
        let (last, rest) = xs
            .split_last()
            .ok_or_else(|| Error::contract("empty input sequence"))?;
        let mut state = *init;
        for x in rest {
            state = self.step_var(params, x, &state)?.1;
        }
        Ok(self.step_var(params, last, &state)?.0)
    }

    fn run_sequence(&self, xs: &[Vec<f64>], init: &CellState) -> Result<Vec<f64>> {
        let tape = Tape::new();
        let p = self.bind(&tape);
        let xv: Vec<Var> = xs
            .iter()
            .map(|x| {
                check_len("cell input", x.len(), self.input_size())?;
                Ok(tape.leaf(Tensor::vector(x)))
            })
            .collect::<Result<_>>()?;
        Ok(self
            .run_sequence_var(&p, &xv, &init.on(&tape))?
            .value()
            .into_data())
    }
}

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::dim(format!(
            "{what} has length {got}, expected {want}"
        )));
    }
    Ok(())
}

pub(crate) fn check_state(state: &StateVars<'_>, hidden: usize, needs_c: bool) -> Result<()> {
    check_len("hidden state", state.h.value().len(), hidden)?;
    match (state.c, needs_c) {
        (Some(c), true) => check_len("cell state", c.value().len(), hidden),
        (None, false) => Ok(()),
        (None, true) => Err(Error::dim("missing cell state")),
        (Some(_), false) => Err(Error::dim("unexpected cell state")),
    }
}
