use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CellState, LstmCell, QgruCell, QlstmCell, RecurrentCell, StateVars};
use crate::diffcore::{Tape, Tensor, Var};
use crate::qsim::VqcConfig;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Lstm,
    Qlstm,
    Qgru,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Lstm => "lstm",
            CellKind::Qlstm => "qlstm",
            CellKind::Qgru => "qgru",
        }
    }

    pub fn is_quantum(self) -> bool {
        !matches!(self, CellKind::Lstm)
    }
}

impl std::str::FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lstm" => Ok(CellKind::Lstm),
            "qlstm" => Ok(CellKind::Qlstm),
            "qgru" => Ok(CellKind::Qgru),
            other => Err(Error::config(format!("unknown model `{other}`"))),
        }
    }
}

/// Any of the three cells behind one type.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Lstm(LstmCell),
    Qlstm(QlstmCell),
    Qgru(QgruCell),
}

macro_rules! each_cell {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            Cell::Lstm($c) => $body,
            Cell::Qlstm($c) => $body,
            Cell::Qgru($c) => $body,
        }
    };
}

impl Cell {
    pub fn new<R: Rng + ?Sized>(
        kind: CellKind,
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        vqc: VqcConfig,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match kind {
            CellKind::Lstm => Cell::Lstm(LstmCell::new(input_size, hidden_size, output_size, rng)?),
            CellKind::Qlstm => Cell::Qlstm(QlstmCell::with_hidden(
                input_size,
                hidden_size,
                output_size,
                vqc,
                rng,
            )?),
            CellKind::Qgru => Cell::Qgru(QgruCell::with_hidden(
                input_size,
                hidden_size,
                output_size,
                vqc,
                rng,
            )?),
        })
    }

    pub fn kind(&self) -> CellKind {
        match self {
            Cell::Lstm(_) => CellKind::Lstm,
            Cell::Qlstm(_) => CellKind::Qlstm,
            Cell::Qgru(_) => CellKind::Qgru,
        }
    }
}

impl RecurrentCell for Cell {
    fn input_size(&self) -> usize {
        each_cell!(self, c => c.input_size())
    }

    fn hidden_size(&self) -> usize {
        each_cell!(self, c => c.hidden_size())
    }

    fn output_size(&self) -> usize {
        each_cell!(self, c => c.output_size())
    }

    fn params(&self) -> Vec<&Tensor> {
        each_cell!(self, c => c.params())
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        each_cell!(self, c => c.params_mut())
    }

    fn init_state(&self) -> CellState {
        each_cell!(self, c => c.init_state())
    }

    fn step_var<'t>(
        &self,
        params: &[Var<'t>],
        x: &Var<'t>,
        state: &StateVars<'t>,
    ) -> Result<(Var<'t>, StateVars<'t>)> {
        each_cell!(self, c => c.step_var(params, x, state))
    }
}

/// `k` cells where layer `j`'s per-step outputs are layer `j+1`'s inputs.
/// Intermediate layers emit `hidden_size` values; the last emits the
/// model output.
#[derive(Clone, Debug, PartialEq)]
pub struct StackedRnn {
    pub layers: Vec<Cell>,
}

impl StackedRnn {
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng + ?Sized>(
        kind: CellKind,
        n_layers: usize,
        input_size: usize,
        hidden_size: usize,
        output_size: usize,
        vqc: VqcConfig,
        rng: &mut R,
    ) -> Result<Self> {
        if n_layers == 0 {
            return Err(Error::config("num_rnn_layers must be positive"));
        }
        let layers = (0..n_layers)
            .map(|j| {
                let inp = if j == 0 { input_size } else { hidden_size };
                let out = if j + 1 == n_layers {
                    output_size
                } else {
                    hidden_size
                };
                Cell::new(kind, inp, hidden_size, out, vqc, rng)
            })
            .collect::<Result<_>>()?;
        Ok(Self { layers })
    }

    pub fn single(cell: Cell) -> Self {
        Self { layers: vec![cell] }
    }

    pub fn kind(&self) -> CellKind {
        self.layers[0].kind()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].input_size()
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().expect("non-empty").output_size()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|c| c.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|c| c.params_mut())
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn bind<'t>(&self, tape: &'t Tape) -> Vec<Var<'t>> {
        tape.leaves(self.params())
    }

    /// Runs the window through every layer from zero states and returns the
    /// final output of the last layer.
    pub fn run_var<'t>(&self, params: &[Var<'t>], xs: &[Var<'t>]) -> Result<Var<'t>> {
        if xs.is_empty() {
            return Err(Error::contract("empty input sequence"));
        }
        let tape = xs[0].tape();
        let mut inputs = xs.to_vec();
        let mut offset = 0;
        for cell in &self.layers {
            let n = cell.params().len();
            let p = &params[offset..offset + n];
            offset += n;
            let mut state = cell.init_state().on(tape);
            let mut outputs = Vec::with_capacity(inputs.len());
            for x in &inputs {
                let (y, next) = cell.step_var(p, x, &state)?;
                outputs.push(y);
                state = next;
            }
            inputs = outputs;
        }
        Ok(*inputs.last().expect("non-empty"))
    }

    /// Prediction after the last element of `xs`.
    pub fn predict(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let tape = Tape::new();
        let p = self.bind(&tape);
        let xv: Vec<Var> = xs.iter().map(|x| tape.leaf(Tensor::vector(x))).collect();
        Ok(self.run_var(&p, &xv)?.value().into_data())
    }
}
