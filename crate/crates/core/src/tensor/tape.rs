//! Operation tape and reverse-mode differentiation.

use std::cell::{Ref, RefCell};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;
use crate::tensor::Tensor;

#[derive(Clone)]
enum Op {
    Leaf,
    Matmul { a: usize, b: usize },
    Add { a: usize, b: usize, broadcast_row: bool },
    Sub { a: usize, b: usize },
    Mul { a: usize, b: usize, broadcast_row: bool },
    Scale { a: usize, c: f64 },
    Relu { a: usize },
    LeakyRelu { a: usize, slope: f64 },
    ConcatCols { parts: Vec<usize> },
    SliceCols { a: usize, start: usize, len: usize },
    GatherRows { a: usize, idx: Rc<Vec<usize>> },
    ScaleRows { a: usize, s: usize },
    RowDot { a: usize, b: usize },
    SegmentSum { a: usize, seg: Rc<Vec<usize>> },
    SegmentSoftmax { a: usize, seg: Rc<Vec<usize>> },
    SpMm { m: Rc<SparseMatrix>, a: usize },
    Sum { a: usize },
    MulScalar { a: usize, s: usize },
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Ordered record of executed operations with the inputs saved for the
/// backward pass. One tape per forward/backward evaluation, confined to a
/// single thread.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a tape node.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: usize,
}

/// Gradients produced by [`Tape::backward`], indexed by tape node.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn of(&self, v: Var<'_>) -> Option<&Tensor> {
        self.grads.get(v.idx).and_then(|g| g.as_ref())
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

    /// Records a constant input; gradients do not flow into it.
    pub fn leaf(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, false)
    }

    /// Records a trainable input; `backward` reports its gradient.
    pub fn param(&self, value: Tensor) -> Var<'_> {
        self.push(value, Op::Leaf, true)
    }

    fn push(&self, value: Tensor, op: Op, needs_grad: bool) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var {
            tape: self,
            idx: nodes.len() - 1,
        }
    }

    fn needs(&self, idx: usize) -> bool {
        self.nodes.borrow()[idx].needs_grad
    }

    /// Accumulates gradients for every recorded node by traversing the tape
    /// in exact reverse execution order. `loss` must be a scalar.
    pub fn backward(&self, loss: Var<'_>) -> Result<Gradients> {
        let nodes = self.nodes.borrow();
        if nodes[loss.idx].value.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "backward target must be scalar, got shape {:?}",
                nodes[loss.idx].value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..nodes.len()).map(|_| None).collect();
        grads[loss.idx] = Some(Tensor::scalar(1.0));

        for idx in (0..=loss.idx).rev() {
            if !nodes[idx].needs_grad {
                grads[idx] = None;
                continue;
            }
            let Some(g) = grads[idx].clone() else {
                continue;
            };
            // keep leaf gradients for the caller; interior ones stay too but
            // leaves are what training reads out
            match &nodes[idx].op {
                Op::Leaf => {}
                Op::Matmul { a, b } => {
                    if nodes[*a].needs_grad {
                        let ga = g.matmul_nt(&nodes[*b].value)?;
                        accumulate(&mut grads, *a, ga);
                    }
                    if nodes[*b].needs_grad {
                        let gb = nodes[*a].value.matmul_tn(&g)?;
                        accumulate(&mut grads, *b, gb);
                    }
                }
                Op::Add {
                    a,
                    b,
                    broadcast_row,
                } => {
                    if nodes[*a].needs_grad {
                        accumulate(&mut grads, *a, g.clone());
                    }
                    if nodes[*b].needs_grad {
                        let gb = if *broadcast_row {
                            sum_rows(&g, nodes[*b].value.shape())
                        } else {
                            g.clone()
                        };
                        accumulate(&mut grads, *b, gb);
                    }
                }
                Op::Sub { a, b } => {
                    if nodes[*a].needs_grad {
                        accumulate(&mut grads, *a, g.clone());
                    }
                    if nodes[*b].needs_grad {
                        accumulate(&mut grads, *b, g.map(|v| -v));
                    }
                }
                Op::Mul {
                    a,
                    b,
                    broadcast_row,
                } => {
                    let av = &nodes[*a].value;
                    let bv = &nodes[*b].value;
                    if nodes[*a].needs_grad {
                        let ga = if *broadcast_row {
                            mul_broadcast_row(&g, bv)
                        } else {
                            elementwise(&g, bv, |x, y| x * y)
                        };
                        accumulate(&mut grads, *a, ga);
                    }
                    if nodes[*b].needs_grad {
                        let prod = elementwise(&g, av, |x, y| x * y);
                        let gb = if *broadcast_row {
                            sum_rows(&prod, bv.shape())
                        } else {
                            prod
                        };
                        accumulate(&mut grads, *b, gb);
                    }
                }
                Op::Scale { a, c } => {
                    if nodes[*a].needs_grad {
                        accumulate(&mut grads, *a, g.map(|v| v * c));
                    }
                }
                Op::Relu { a } => {
                    if nodes[*a].needs_grad {
                        let mut ga = g.clone();
                        for (gv, &xv) in ga.data_mut().iter_mut().zip(nodes[*a].value.data()) {
                            if xv <= 0.0 {
                                *gv = 0.0;
                            }
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::LeakyRelu { a, slope } => {
                    if nodes[*a].needs_grad {
                        let mut ga = g.clone();
                        for (gv, &xv) in ga.data_mut().iter_mut().zip(nodes[*a].value.data()) {
                            if xv <= 0.0 {
                                *gv *= slope;
                            }
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::ConcatCols { parts } => {
                    let (rows, _) = g.dims2()?;
                    let mut offset = 0;
                    for &p in parts {
                        let (_, pc) = nodes[p].value.dims2()?;
                        if nodes[p].needs_grad {
                            let mut gp = Tensor::zeros(nodes[p].value.shape());
                            for r in 0..rows {
                                let src = &g.row_slice(r)[offset..offset + pc];
                                gp.row_slice_mut(r).copy_from_slice(src);
                            }
                            accumulate(&mut grads, p, gp);
                        }
                        offset += pc;
                    }
                }
                Op::SliceCols { a, start, len } => {
                    if nodes[*a].needs_grad {
                        let (rows, _) = g.dims2()?;
                        let mut ga = Tensor::zeros(nodes[*a].value.shape());
                        for r in 0..rows {
                            ga.row_slice_mut(r)[*start..*start + *len]
                                .copy_from_slice(g.row_slice(r));
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::GatherRows { a, idx: rows } => {
                    if nodes[*a].needs_grad {
                        let mut ga = Tensor::zeros(nodes[*a].value.shape());
                        for (e, &src_row) in rows.iter().enumerate() {
                            let gr = g.row_slice(e);
                            let dst = ga.row_slice_mut(src_row);
                            for (d, s) in dst.iter_mut().zip(gr) {
                                *d += s;
                            }
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::ScaleRows { a, s } => {
                    let av = &nodes[*a].value;
                    let sv = &nodes[*s].value;
                    if nodes[*a].needs_grad {
                        let mut ga = g.clone();
                        let (rows, _) = ga.dims2()?;
                        for r in 0..rows {
                            let f = sv.data()[r];
                            for v in ga.row_slice_mut(r) {
                                *v *= f;
                            }
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                    if nodes[*s].needs_grad {
                        let (rows, _) = g.dims2()?;
                        let mut gs = Tensor::zeros(sv.shape());
                        for r in 0..rows {
                            gs.data_mut()[r] = dot(g.row_slice(r), av.row_slice(r));
                        }
                        accumulate(&mut grads, *s, gs);
                    }
                }
                Op::RowDot { a, b } => {
                    let av = &nodes[*a].value;
                    let bv = &nodes[*b].value;
                    let (rows, _) = av.dims2()?;
                    if nodes[*a].needs_grad {
                        let mut ga = Tensor::zeros(av.shape());
                        for r in 0..rows {
                            let f = g.data()[r];
                            let src = bv.row_slice(r);
                            for (d, s) in ga.row_slice_mut(r).iter_mut().zip(src) {
                                *d = f * s;
                            }
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                    if nodes[*b].needs_grad {
                        let mut gb = Tensor::zeros(bv.shape());
                        for r in 0..rows {
                            let f = g.data()[r];
                            let src = av.row_slice(r);
                            for (d, s) in gb.row_slice_mut(r).iter_mut().zip(src) {
                                *d = f * s;
                            }
                        }
                        accumulate(&mut grads, *b, gb);
                    }
                }
                Op::SegmentSum { a, seg } => {
                    if nodes[*a].needs_grad {
                        let mut ga = Tensor::zeros(nodes[*a].value.shape());
                        for (e, &s) in seg.iter().enumerate() {
                            let src = g.row_slice(s);
                            ga.row_slice_mut(e).copy_from_slice(src);
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::SegmentSoftmax { a, seg } => {
                    if nodes[*a].needs_grad {
                        let sv = &nodes[idx].value; // softmax output
                        let n_seg = seg.iter().copied().max().map_or(0, |m| m + 1);
                        let mut seg_dot = vec![0.0; n_seg];
                        for (e, &s) in seg.iter().enumerate() {
                            seg_dot[s] += sv.data()[e] * g.data()[e];
                        }
                        let mut ga = Tensor::zeros(nodes[*a].value.shape());
                        for (e, &s) in seg.iter().enumerate() {
                            ga.data_mut()[e] = sv.data()[e] * (g.data()[e] - seg_dot[s]);
                        }
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::SpMm { m, a } => {
                    if nodes[*a].needs_grad {
                        // operators here are symmetric, so Mᵀ·g = M·g
                        let ga = m.apply_dense(&g)?;
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::Sum { a } => {
                    if nodes[*a].needs_grad {
                        let ga = Tensor::full(nodes[*a].value.shape(), g.data()[0]);
                        accumulate(&mut grads, *a, ga);
                    }
                }
                Op::MulScalar { a, s } => {
                    let av = &nodes[*a].value;
                    let sv = nodes[*s].value.data()[0];
                    if nodes[*a].needs_grad {
                        accumulate(&mut grads, *a, g.map(|v| v * sv));
                    }
                    if nodes[*s].needs_grad {
                        let total = dot(g.data(), av.data());
                        accumulate(&mut grads, *s, Tensor::scalar(total));
                    }
                }
            }
            // interior gradients are no longer needed once propagated
            if !matches!(nodes[idx].op, Op::Leaf) {
                grads[idx] = None;
            }
        }
        Ok(Gradients { grads })
    }
}

fn accumulate(grads: &mut [Option<Tensor>], idx: usize, add: Tensor) {
    match &mut grads[idx] {
        Some(g) => {
            for (d, s) in g.data_mut().iter_mut().zip(add.data()) {
                *d += s;
            }
        }
        slot @ None => *slot = Some(add),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn elementwise(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let mut out = a.clone();
    for (d, s) in out.data_mut().iter_mut().zip(b.data()) {
        *d = f(*d, *s);
    }
    out
}

/// a (r×c) combined with a row vector b (1×c or rank-1 c) broadcast over rows.
fn mul_broadcast_row(a: &Tensor, b: &Tensor) -> Tensor {
    let (r, c) = a.dims2().expect("rank <= 2");
    let mut out = a.clone();
    for i in 0..r {
        for j in 0..c {
            out.data_mut()[i * c + j] *= b.data()[j];
        }
    }
    out
}

fn add_broadcast_row(a: &Tensor, b: &Tensor) -> Tensor {
    let (r, c) = a.dims2().expect("rank <= 2");
    let mut out = a.clone();
    for i in 0..r {
        for j in 0..c {
            out.data_mut()[i * c + j] += b.data()[j];
        }
    }
    out
}

/// Sums an r×c tensor over rows into the shape of `like` (1×c or rank-1 c).
fn sum_rows(g: &Tensor, like: &[usize]) -> Tensor {
    let (r, c) = g.dims2().expect("rank <= 2");
    let mut out = Tensor::zeros(like);
    for i in 0..r {
        for j in 0..c {
            out.data_mut()[j] += g.data()[i * c + j];
        }
    }
    out
}

fn is_row_broadcast(a: &[usize], b: &[usize]) -> bool {
    match (a.len(), b.len()) {
        (2, 2) => b[0] == 1 && a[1] == b[1] && a[0] != 1,
        (2, 1) => a[1] == b[0],
        _ => false,
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> Ref<'_, Tensor> {
        Ref::map(self.tape.nodes.borrow(), |nodes| &nodes[self.idx].value)
    }

    pub fn to_tensor(&self) -> Tensor {
        self.value().clone()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.value().shape().to_vec()
    }

    /// Scalar value of a single-element tensor.
    pub fn item(&self) -> f64 {
        let v = self.value();
        debug_assert_eq!(v.len(), 1);
        v.data()[0]
    }

    fn binary_shapes(
        &self,
        rhs: Var<'t>,
        op: &'static str,
        allow_broadcast: bool,
    ) -> Result<bool> {
        let (ls, rs) = (self.shape(), rhs.shape());
        if ls == rs {
            return Ok(false);
        }
        if allow_broadcast && is_row_broadcast(&ls, &rs) {
            return Ok(true);
        }
        Err(Error::ShapeMismatch {
            op,
            left: ls,
            right: rs,
        })
    }

    pub fn matmul(self, rhs: Var<'t>) -> Result<Var<'t>> {
        let value = self.value().matmul(&rhs.value())?;
        let needs = self.tape.needs(self.idx) || self.tape.needs(rhs.idx);
        Ok(self.tape.push(
            value,
            Op::Matmul {
                a: self.idx,
                b: rhs.idx,
            },
            needs,
        ))
    }

    /// Elementwise sum; `rhs` may be a row vector broadcast over rows.
    pub fn add(self, rhs: Var<'t>) -> Result<Var<'t>> {
        let broadcast = self.binary_shapes(rhs, "add", true)?;
        let value = if broadcast {
            add_broadcast_row(&self.value(), &rhs.value())
        } else {
            elementwise(&self.value(), &rhs.value(), |x, y| x + y)
        };
        let needs = self.tape.needs(self.idx) || self.tape.needs(rhs.idx);
        Ok(self.tape.push(
            value,
            Op::Add {
                a: self.idx,
                b: rhs.idx,
                broadcast_row: broadcast,
            },
            needs,
        ))
    }

    pub fn sub(self, rhs: Var<'t>) -> Result<Var<'t>> {
        self.binary_shapes(rhs, "sub", false)?;
        let value = elementwise(&self.value(), &rhs.value(), |x, y| x - y);
        let needs = self.tape.needs(self.idx) || self.tape.needs(rhs.idx);
        Ok(self.tape.push(
            value,
            Op::Sub {
                a: self.idx,
                b: rhs.idx,
            },
            needs,
        ))
    }

    /// Elementwise product; `rhs` may be a row vector broadcast over rows.
    pub fn mul(self, rhs: Var<'t>) -> Result<Var<'t>> {
        let broadcast = self.binary_shapes(rhs, "mul", true)?;
        let value = if broadcast {
            mul_broadcast_row(&self.value(), &rhs.value())
        } else {
            elementwise(&self.value(), &rhs.value(), |x, y| x * y)
        };
        let needs = self.tape.needs(self.idx) || self.tape.needs(rhs.idx);
        Ok(self.tape.push(
            value,
            Op::Mul {
                a: self.idx,
                b: rhs.idx,
                broadcast_row: broadcast,
            },
            needs,
        ))
    }

    pub fn scale(self, c: f64) -> Var<'t> {
        let value = self.value().map(|v| v * c);
        let needs = self.tape.needs(self.idx);
        self.tape.push(value, Op::Scale { a: self.idx, c }, needs)
    }

    pub fn relu(self) -> Var<'t> {
        let value = self.value().map(|v| v.max(0.0));
        let needs = self.tape.needs(self.idx);
        self.tape.push(value, Op::Relu { a: self.idx }, needs)
    }

    pub fn leaky_relu(self, slope: f64) -> Var<'t> {
        let value = self.value().map(|v| if v > 0.0 { v } else { slope * v });
        let needs = self.tape.needs(self.idx);
        self.tape
            .push(value, Op::LeakyRelu { a: self.idx, slope }, needs)
    }

    /// Columns `[start, start+len)`.
    pub fn slice_cols(self, start: usize, len: usize) -> Result<Var<'t>> {
        let (rows, cols) = self.value().dims2()?;
        if start + len > cols {
            return Err(Error::InvalidArgument(format!(
                "slice [{start}, {}) out of {cols} columns",
                start + len
            )));
        }
        let mut value = Tensor::zeros(&[rows, len]);
        {
            let v = self.value();
            for r in 0..rows {
                value
                    .row_slice_mut(r)
                    .copy_from_slice(&v.row_slice(r)[start..start + len]);
            }
        }
        let needs = self.tape.needs(self.idx);
        Ok(self.tape.push(
            value,
            Op::SliceCols {
                a: self.idx,
                start,
                len,
            },
            needs,
        ))
    }

    /// Rows selected by index, with repetition (output row e = input row idx[e]).
    pub fn gather_rows(self, idx: Rc<Vec<usize>>) -> Result<Var<'t>> {
        let (rows, cols) = self.value().dims2()?;
        if let Some(&bad) = idx.iter().find(|&&r| r >= rows) {
            return Err(Error::InvalidArgument(format!(
                "gather index {bad} out of {rows} rows"
            )));
        }
        let mut value = Tensor::zeros(&[idx.len(), cols]);
        {
            let v = self.value();
            for (e, &r) in idx.iter().enumerate() {
                value.row_slice_mut(e).copy_from_slice(v.row_slice(r));
            }
        }
        let needs = self.tape.needs(self.idx);
        Ok(self
            .tape
            .push(value, Op::GatherRows { a: self.idx, idx }, needs))
    }

    /// Row e scaled by s[e]; `s` has one entry per row.
    pub fn scale_rows(self, s: Var<'t>) -> Result<Var<'t>> {
        let (rows, _) = self.value().dims2()?;
        if s.value().len() != rows {
            return Err(Error::ShapeMismatch {
                op: "scale_rows",
                left: self.shape(),
                right: s.shape(),
            });
        }
        let mut value = self.to_tensor();
        {
            let sv = s.value();
            for r in 0..rows {
                let f = sv.data()[r];
                for v in value.row_slice_mut(r) {
                    *v *= f;
                }
            }
        }
        let needs = self.tape.needs(self.idx) || self.tape.needs(s.idx);
        Ok(self.tape.push(
            value,
            Op::ScaleRows {
                a: self.idx,
                s: s.idx,
            },
            needs,
        ))
    }

    /// Per-row dot product of two equal-shape matrices, giving an r×1 column.
    pub fn row_dot(self, rhs: Var<'t>) -> Result<Var<'t>> {
        self.binary_shapes(rhs, "row_dot", false)?;
        let (rows, _) = self.value().dims2()?;
        let mut value = Tensor::zeros(&[rows, 1]);
        {
            let (a, b) = (self.value(), rhs.value());
            for r in 0..rows {
                value.data_mut()[r] = dot(a.row_slice(r), b.row_slice(r));
            }
        }
        let needs = self.tape.needs(self.idx) || self.tape.needs(rhs.idx);
        Ok(self.tape.push(
            value,
            Op::RowDot {
                a: self.idx,
                b: rhs.idx,
            },
            needs,
        ))
    }

    /// Sums rows into `n_segments` buckets: output row k = Σ rows e with seg[e] = k.
    /// Empty segments give zero rows.
    pub fn segment_sum(self, seg: Rc<Vec<usize>>, n_segments: usize) -> Result<Var<'t>> {
        let (rows, cols) = self.value().dims2()?;
        if seg.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "segment ids ({}) must match rows ({rows})",
                seg.len()
            )));
        }
        if let Some(&bad) = seg.iter().find(|&&s| s >= n_segments) {
            return Err(Error::InvalidArgument(format!(
                "segment id {bad} out of {n_segments}"
            )));
        }
        let mut value = Tensor::zeros(&[n_segments, cols]);
        {
            let v = self.value();
            for (e, &s) in seg.iter().enumerate() {
                let src = v.row_slice(e);
                for (d, x) in value.row_slice_mut(s).iter_mut().zip(src) {
                    *d += x;
                }
            }
        }
        let needs = self.tape.needs(self.idx);
        Ok(self
            .tape
            .push(value, Op::SegmentSum { a: self.idx, seg }, needs))
    }

    /// Softmax of a column of logits within each segment, guarded by
    /// per-segment max subtraction. Each non-empty segment sums to 1.
    pub fn segment_softmax(self, seg: Rc<Vec<usize>>, n_segments: usize) -> Result<Var<'t>> {
        let len = self.value().len();
        if seg.len() != len {
            return Err(Error::InvalidArgument(format!(
                "segment ids ({}) must match logit count ({len})",
                seg.len()
            )));
        }
        if let Some(&bad) = seg.iter().find(|&&s| s >= n_segments) {
            return Err(Error::InvalidArgument(format!(
                "segment id {bad} out of {n_segments}"
            )));
        }
        let mut value = self.to_tensor();
        {
            let mut seg_max = vec![f64::NEG_INFINITY; n_segments];
            for (e, &s) in seg.iter().enumerate() {
                seg_max[s] = seg_max[s].max(value.data()[e]);
            }
            let mut seg_sum = vec![0.0; n_segments];
            for (e, &s) in seg.iter().enumerate() {
                let x = (value.data()[e] - seg_max[s]).exp();
                value.data_mut()[e] = x;
                seg_sum[s] += x;
            }
            for (e, &s) in seg.iter().enumerate() {
                value.data_mut()[e] /= seg_sum[s];
            }
        }
        let needs = self.tape.needs(self.idx);
        Ok(self
            .tape
            .push(value, Op::SegmentSoftmax { a: self.idx, seg }, needs))
    }

    /// Product with a fixed symmetric sparse matrix: M·self.
    pub fn propagate(self, m: Rc<SparseMatrix>) -> Result<Var<'t>> {
        let value = m.apply_dense(&self.value())?;
        let needs = self.tape.needs(self.idx);
        Ok(self
            .tape
            .push(value, Op::SpMm { m, a: self.idx }, needs))
    }

    /// Sum of all entries, as a scalar.
    pub fn sum(self) -> Var<'t> {
        let total: f64 = self.value().data().iter().sum();
        let needs = self.tape.needs(self.idx);
        self.tape
            .push(Tensor::scalar(total), Op::Sum { a: self.idx }, needs)
    }

    /// Every entry multiplied by a single-element tensor variable.
    pub fn mul_scalar(self, s: Var<'t>) -> Result<Var<'t>> {
        if s.value().len() != 1 {
            return Err(Error::ShapeMismatch {
                op: "mul_scalar",
                left: self.shape(),
                right: s.shape(),
            });
        }
        let f = s.value().data()[0];
        let value = self.value().map(|v| v * f);
        let needs = self.tape.needs(self.idx) || self.tape.needs(s.idx);
        Ok(self.tape.push(
            value,
            Op::MulScalar {
                a: self.idx,
                s: s.idx,
            },
            needs,
        ))
    }
}

/// Concatenates matrices with equal row counts along the column axis.
pub fn concat_cols<'t>(tape: &'t Tape, parts: &[Var<'t>]) -> Result<Var<'t>> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("concat of zero tensors".into()));
    }
    let (rows, _) = parts[0].value().dims2()?;
    let mut total_cols = 0;
    for p in parts {
        let (r, c) = p.value().dims2()?;
        if r != rows {
            return Err(Error::ShapeMismatch {
                op: "concat_cols",
                left: parts[0].shape(),
                right: p.shape(),
            });
        }
        total_cols += c;
    }
    let mut value = Tensor::zeros(&[rows, total_cols]);
    {
        let mut offset = 0;
        for p in parts {
            let v = p.value();
            let (_, c) = v.dims2()?;
            for r in 0..rows {
                value.row_slice_mut(r)[offset..offset + c].copy_from_slice(v.row_slice(r));
            }
            offset += c;
        }
    }
    let needs = parts.iter().any(|p| tape.needs(p.idx));
    Ok(tape.push(
        value,
        Op::ConcatCols {
            parts: parts.iter().map(|p| p.idx).collect(),
        },
        needs,
    ))
}

/// Compares the reverse-mode gradient of a scalar-valued function against
/// central finite differences with step `step`, over every element of every
/// input.
///
/// Returns the largest elementwise error |g_rev − g_fd| / max(1, |g_rev|, |g_fd|)
/// (relative with a unit floor, so near-zero gradients are compared absolutely).
pub fn grad_check_multi<F>(f: F, inputs: &[Tensor], step: f64) -> Result<f64>
where
    F: for<'t> Fn(&'t Tape, &[Var<'t>]) -> Result<Var<'t>>,
{
    let tape = Tape::new();
    let vars: Vec<Var<'_>> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&tape, &vars)?;
    if out.value().len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "grad_check target must be scalar, got shape {:?}",
            out.shape()
        )));
    }
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .zip(inputs)
        .map(|(v, t)| grads.of(*v).cloned().unwrap_or_else(|| Tensor::zeros(t.shape())))
        .collect();

    let eval = |xs: &[Tensor]| -> Result<f64> {
        let t = Tape::new();
        let vs: Vec<Var<'_>> = xs.iter().map(|x| t.leaf(x.clone())).collect();
        Ok(f(&t, &vs)?.item())
    };

    let mut work: Vec<Tensor> = inputs.to_vec();
    let mut max_err: f64 = 0.0;
    for ti in 0..inputs.len() {
        for i in 0..inputs[ti].len() {
            let orig = inputs[ti].data()[i];
            work[ti].data_mut()[i] = orig + step;
            let fp = eval(&work)?;
            work[ti].data_mut()[i] = orig - step;
            let fm = eval(&work)?;
            work[ti].data_mut()[i] = orig;
            let fd = (fp - fm) / (2.0 * step);
            let a = analytic[ti].data()[i];
            let err = (a - fd).abs() / f64::max(1.0, f64::max(a.abs(), fd.abs()));
            max_err = max_err.max(err);
        }
    }
    Ok(max_err)
}

/// Single-input convenience form of [`grad_check_multi`].
pub fn grad_check<F>(f: F, x: &Tensor, step: f64) -> Result<f64>
where
    F: for<'t> Fn(&'t Tape, Var<'t>) -> Result<Var<'t>>,
{
    grad_check_multi(|tape, vars| f(tape, vars[0]), &[x.clone()], step)
}
