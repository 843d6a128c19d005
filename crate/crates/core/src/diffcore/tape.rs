use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use super::Tensor;
use crate::{Error, Result};

/// A differentiable operation whose forward value is computed outside the
/// tape. The quantum circuits plug in through this.
pub trait CustomOp: fmt::Debug {
    /// Gradients with respect to each input, given the upstream gradient of
    /// the output. Must return one tensor per input, shaped like the input.
    fn backward(
        &self,
        inputs: &[&Tensor],
        output: &Tensor,
        upstream: &Tensor,
    ) -> Result<Vec<Tensor>>;
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul,
    Add,
    Sub,
    Mul,
    AddRow,
    Affine { scale: f64 },
    Tanh,
    Sigmoid,
    Concat { axis: usize },
    Slice { axis: usize, start: usize },
    Reshape,
    Sum,
    Mean,
    Custom(Rc<dyn CustomOp>),
}

#[derive(Debug)]
struct Node {
    op: Op,
    parents: Vec<usize>,
    value: Tensor,
}

/// Append-only record of a forward computation.
///
/// Nodes are pushed in evaluation order, so every parent index is smaller
/// than its child's and the reverse sweep is a single backwards scan.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: usize,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Var").field("id", &self.id).finish()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Registers a tracked input (parameter or data).
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        let id = self.push_unchecked(Op::Leaf, vec![], value);
        Var { tape: self, id }
    }

    /// Registers several leaves in order.
    pub fn leaves<'a>(&self, values: impl IntoIterator<Item = &'a Tensor>) -> Vec<Var<'_>> {
        values.into_iter().map(|t| self.leaf(t.clone())).collect()
    }

    /// Records a custom op whose forward value was computed by the caller.
    pub fn custom<'t>(
        &'t self,
        op: Rc<dyn CustomOp>,
        inputs: &[Var<'t>],
        output: Tensor,
    ) -> Result<Var<'t>> {
        self.push(
            Op::Custom(op),
            inputs.iter().map(|v| v.id).collect(),
            output,
        )
    }

    fn push_unchecked(&self, op: Op, parents: Vec<usize>, value: Tensor) -> usize {
        let mut nodes = self.nodes.borrow_mut();
        debug_assert!(parents.iter().all(|&p| p < nodes.len()));
        nodes.push(Node { op, parents, value });
        nodes.len() - 1
    }

    fn push(&self, op: Op, parents: Vec<usize>, value: Tensor) -> Result<Var<'_>> {
        if !value.is_finite() {
            return Err(Error::Divergence(format!("non-finite output from {op:?}")));
        }
        let id = self.push_unchecked(op, parents, value);
        Ok(Var { tape: self, id })
    }

    fn value_of(&self, id: usize) -> Tensor {
        self.nodes.borrow()[id].value.clone()
    }

    /// Reverse sweep from a scalar node.
    pub fn backward(&self, loss: Var<'_>) -> Result<Gradients> {
        if !std::ptr::eq(loss.tape, self) {
            return Err(Error::contract("loss is recorded on a different tape"));
        }
        let nodes = self.nodes.borrow();
        let root = &nodes[loss.id];
        if !root.value.is_scalar() {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                root.value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.id + 1];
        grads[loss.id] = Some(Tensor::full(root.value.shape(), 1.0));

        for id in (0..=loss.id).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &nodes[id];
            if !node.parents.is_empty() {
                let parent_grads = node_backward(&nodes, node, &g)?;
                for (&p, pg) in node.parents.iter().zip(parent_grads) {
                    match &mut grads[p] {
                        Some(acc) => acc.add_assign(&pg),
                        slot => *slot = Some(pg),
                    }
                }
            }
            grads[id] = Some(g);
        }
        let shapes = nodes[..=loss.id]
            .iter()
            .map(|n| n.value.shape().to_vec())
            .collect();
        Ok(Gradients { grads, shapes })
    }
}

fn node_backward(nodes: &[Node], node: &Node, g: &Tensor) -> Result<Vec<Tensor>> {
    let parent = |i: usize| &nodes[node.parents[i]].value;
    let out = &node.value;
    Ok(match &node.op {
        Op::Leaf => vec![],
        Op::MatMul => {
            let (a, b) = (parent(0), parent(1));
            vec![g.matmul_t(b)?, a.t_matmul(g)?]
        }
        Op::Add => vec![g.clone(), g.clone()],
        Op::Sub => vec![g.clone(), g.map(|v| -v)],
        Op::Mul => {
            let (a, b) = (parent(0), parent(1));
            vec![g.zip_map(b, |g, b| g * b)?, g.zip_map(a, |g, a| g * a)?]
        }
        Op::AddRow => {
            let (rows, cols) = g.dims2()?;
            let mut gb = vec![0.0; cols];
            for r in 0..rows {
                for (acc, v) in gb.iter_mut().zip(&g.data()[r * cols..(r + 1) * cols]) {
                    *acc += v;
                }
            }
            vec![g.clone(), Tensor::new(parent(1).shape().to_vec(), gb)?]
        }
        Op::Affine { scale } => vec![g.map(|v| v * scale)],
        Op::Tanh => vec![g.zip_map(out, |g, y| g * (1.0 - y * y))?],
        Op::Sigmoid => vec![g.zip_map(out, |g, y| g * y * (1.0 - y))?],
        Op::Concat { axis } => {
            let mut start = 0;
            let mut res = Vec::with_capacity(node.parents.len());
            for i in 0..node.parents.len() {
                let len = parent(i).shape()[*axis];
                res.push(slice_axis(g, *axis, start, len)?);
                start += len;
            }
            res
        }
        Op::Slice { axis, start } => {
            let src = parent(0);
            let mut full = Tensor::zeros(src.shape());
            let (outer, _, inner) = split_axis(src.shape(), *axis);
            let src_len = src.shape()[*axis];
            let len = out.shape()[*axis];
            for o in 0..outer {
                let dst = (o * src_len + start) * inner;
                let from = o * len * inner;
                full.data_mut()[dst..dst + len * inner]
                    .copy_from_slice(&g.data()[from..from + len * inner]);
            }
            vec![full]
        }
        Op::Reshape => vec![g.reshape(parent(0).shape())?],
        Op::Sum => vec![Tensor::full(parent(0).shape(), g.item())],
        Op::Mean => {
            let p = parent(0);
            vec![Tensor::full(p.shape(), g.item() / p.len() as f64)]
        }
        Op::Custom(op) => {
            let inputs: Vec<&Tensor> = (0..node.parents.len()).map(parent).collect();
            let res = op.backward(&inputs, out, g)?;
            if res.len() != inputs.len()
                || res.iter().zip(&inputs).any(|(r, i)| r.shape() != i.shape())
            {
                return Err(Error::contract(format!(
                    "custom op {op:?} returned mis-shaped gradients"
                )));
            }
            res
        }
    })
}

/// `(outer, axis_len, inner)` extents around `axis` of a row-major shape.
fn split_axis(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

fn slice_axis(t: &Tensor, axis: usize, start: usize, len: usize) -> Result<Tensor> {
    if axis >= t.rank() {
        return Err(Error::dim(format!(
            "axis {axis} out of range for {:?}",
            t.shape()
        )));
    }
    let (outer, n, inner) = split_axis(t.shape(), axis);
    if len == 0 || start + len > n {
        return Err(Error::dim(format!(
            "slice {start}..{} outside axis of length {n}",
            start + len
        )));
    }
    let mut data = Vec::with_capacity(outer * len * inner);
    for o in 0..outer {
        let from = (o * n + start) * inner;
        data.extend_from_slice(&t.data()[from..from + len * inner]);
    }
    let mut shape = t.shape().to_vec();
    shape[axis] = len;
    Tensor::new(shape, data)
}

fn concat_axis(parts: &[Tensor], axis: usize) -> Result<Tensor> {
    let first = parts
        .first()
        .ok_or_else(|| Error::dim("concat of zero tensors"))?;
    if axis >= first.rank() {
        return Err(Error::dim(format!(
            "axis {axis} out of range for {:?}",
            first.shape()
        )));
    }
    for p in parts {
        let ok = p.rank() == first.rank()
            && p.shape()
                .iter()
                .zip(first.shape())
                .enumerate()
                .all(|(i, (a, b))| i == axis || a == b);
        if !ok {
            return Err(Error::dim(format!(
                "cannot concat {:?} with {:?} along axis {axis}",
                first.shape(),
                p.shape()
            )));
        }
    }
    let (outer, _, inner) = split_axis(first.shape(), axis);
    let total: usize = parts.iter().map(|p| p.shape()[axis]).sum();
    let mut data = Vec::with_capacity(outer * total * inner);
    for o in 0..outer {
        for p in parts {
            let n = p.shape()[axis] * inner;
            data.extend_from_slice(&p.data()[o * n..(o + 1) * n]);
        }
    }
    let mut shape = first.shape().to_vec();
    shape[axis] = total;
    Tensor::new(shape, data)
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'t> Var<'t> {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    pub fn value(&self) -> Tensor {
        self.tape.value_of(self.id)
    }

    pub fn shape(&self) -> Vec<usize> {
        self.tape.nodes.borrow()[self.id].value.shape().to_vec()
    }

    fn with_values<T>(&self, other: &Var<'t>, f: impl FnOnce(&Tensor, &Tensor) -> T) -> T {
        debug_assert!(
            std::ptr::eq(self.tape, other.tape),
            "vars from different tapes"
        );
        let nodes = self.tape.nodes.borrow();
        f(&nodes[self.id].value, &nodes[other.id].value)
    }

    fn unary(&self, op: Op, f: impl FnOnce(&Tensor) -> Result<Tensor>) -> Result<Var<'t>> {
        let value = f(&self.tape.nodes.borrow()[self.id].value)?;
        self.tape.push(op, vec![self.id], value)
    }

    fn binary(
        &self,
        other: &Var<'t>,
        op: Op,
        f: impl FnOnce(&Tensor, &Tensor) -> Result<Tensor>,
    ) -> Result<Var<'t>> {
        let value = self.with_values(other, f)?;
        self.tape.push(op, vec![self.id, other.id], value)
    }

    pub fn matmul(&self, rhs: &Var<'t>) -> Result<Var<'t>> {
        self.binary(rhs, Op::MatMul, |a, b| a.matmul(b))
    }

    pub fn add(&self, rhs: &Var<'t>) -> Result<Var<'t>> {
        self.binary(rhs, Op::Add, |a, b| a.zip_map(b, |x, y| x + y))
    }

    pub fn sub(&self, rhs: &Var<'t>) -> Result<Var<'t>> {
        self.binary(rhs, Op::Sub, |a, b| a.zip_map(b, |x, y| x - y))
    }

    /// Element-wise (Hadamard) product.
    pub fn mul(&self, rhs: &Var<'t>) -> Result<Var<'t>> {
        self.binary(rhs, Op::Mul, |a, b| a.zip_map(b, |x, y| x * y))
    }

    /// Adds a length-`n` bias to every row of an `m×n` matrix.
    pub fn add_row(&self, bias: &Var<'t>) -> Result<Var<'t>> {
        self.binary(bias, Op::AddRow, |a, b| {
            let (rows, cols) = a.dims2()?;
            if b.len() != cols || b.rank() != 1 {
                return Err(Error::dim(format!(
                    "bias {:?} does not match {cols} columns",
                    b.shape()
                )));
            }
            let mut data = a.data().to_vec();
            for r in 0..rows {
                for (x, y) in data[r * cols..(r + 1) * cols].iter_mut().zip(b.data()) {
                    *x += y;
                }
            }
            Tensor::new(a.shape().to_vec(), data)
        })
    }

    /// `scale * x + shift`, element-wise.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Var<'t>> {
        self.unary(Op::Affine { scale }, |a| Ok(a.map(|v| scale * v + shift)))
    }

    pub fn scale(&self, scale: f64) -> Result<Var<'t>> {
        self.affine(scale, 0.0)
    }

    /// `1 - x`
    pub fn one_minus(&self) -> Result<Var<'t>> {
        self.affine(-1.0, 1.0)
    }

    pub fn tanh(&self) -> Result<Var<'t>> {
        self.unary(Op::Tanh, |a| Ok(a.map(f64::tanh)))
    }

    pub fn sigmoid(&self) -> Result<Var<'t>> {
        self.unary(Op::Sigmoid, |a| Ok(a.map(sigmoid)))
    }

    pub fn slice(&self, axis: usize, start: usize, len: usize) -> Result<Var<'t>> {
        self.unary(Op::Slice { axis, start }, |a| {
            slice_axis(a, axis, start, len)
        })
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Var<'t>> {
        self.unary(Op::Reshape, |a| a.reshape(shape))
    }

    pub fn sum(&self) -> Result<Var<'t>> {
        self.unary(Op::Sum, |a| Ok(Tensor::scalar(a.sum())))
    }

    pub fn mean(&self) -> Result<Var<'t>> {
        self.unary(Op::Mean, |a| Ok(Tensor::scalar(a.sum() / a.len() as f64)))
    }

    /// Mean squared difference to `target`.
    pub fn mse(&self, target: &Var<'t>) -> Result<Var<'t>> {
        let d = self.sub(target)?;
        d.mul(&d)?.mean()
    }

    /// Concatenates along `axis`. Shapes must agree on every other axis.
    pub fn concat(parts: &[Var<'t>], axis: usize) -> Result<Var<'t>> {
        let first = parts
            .first()
            .ok_or_else(|| Error::dim("concat of zero tensors"))?;
        let tape = first.tape;
        let value = {
            let nodes = tape.nodes.borrow();
            let vals: Vec<Tensor> = parts.iter().map(|p| nodes[p.id].value.clone()).collect();
            concat_axis(&vals, axis)?
        };
        tape.push(
            Op::Concat { axis },
            parts.iter().map(|p| p.id).collect(),
            value,
        )
    }
}

/// Result of a reverse sweep: one optional gradient per node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `var`; zeros when `var` did not
    /// influence the loss.
    pub fn wrt(&self, var: &Var<'_>) -> Tensor {
        match self.grads.get(var.id) {
            Some(Some(g)) => g.clone(),
            Some(None) => Tensor::zeros(&self.shapes[var.id]),
            None => Tensor::zeros(&var.shape()),
        }
    }

    pub fn wrt_all(&self, vars: &[Var<'_>]) -> Vec<Tensor> {
        vars.iter().map(|v| self.wrt(v)).collect()
    }
}
