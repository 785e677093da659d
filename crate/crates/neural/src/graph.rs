//! Tape-based reverse-mode automatic differentiation.
//!
//! Nodes are coarse (a whole dense layer or convolution is one node) so the
//! tape stays short and the kernels stay cache friendly. A [`Graph`] lives
//! for one forward/backward pass and is then dropped.

use crate::error::{NeuralError, Result};
use crate::kernels::{col2im, gemm, im2col};
use crate::tensor::Tensor;

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Leaf,
    Linear { x: Var, w: Var, b: Var },
    Conv3x3 { x: Var, w: Var, b: Var },
    Relu(Var),
    Reshape(Var),
    Gather { x: Var, idx: Vec<usize> },
    LogSoftmax(Var),
    Pick { x: Var, idx: Vec<usize> },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Min(Var, Var),
    Exp(Var),
    Square(Var),
    Scale(Var, f64),
    Clamp(Var, f64, f64),
    RowSum(Var),
    Sum(Var),
    Mean(Var),
}

#[derive(Debug)]
struct Node {
    shape: Vec<usize>,
    value: Vec<f64>,
    grad: Vec<f64>,
    requires_grad: bool,
    op: Op,
}

#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<f64>, requires_grad: bool, op: Op) -> Var {
        debug_assert_eq!(numel(&shape), value.len());
        self.nodes.push(Node {
            grad: Vec::new(),
            shape,
            value,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    /// A constant leaf; no gradient flows into it.
    pub fn input(&mut self, shape: &[usize], values: Vec<f64>) -> Var {
        assert_eq!(numel(shape), values.len(), "input values do not match shape");
        self.push(shape.to_vec(), values, false, Op::Leaf)
    }

    /// A leaf whose gradient is tracked (used for parameters and gradient checks).
    pub fn leaf(&mut self, shape: &[usize], values: Vec<f64>) -> Var {
        assert_eq!(numel(shape), values.len(), "leaf values do not match shape");
        self.push(shape.to_vec(), values, true, Op::Leaf)
    }

    pub fn param(&mut self, t: &Tensor) -> Var {
        self.leaf(t.shape(), t.values.clone())
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    /// Gradient of the last `backward` loss with respect to `v`; zeros if the
    /// node did not take part.
    pub fn grad(&self, v: Var) -> Vec<f64> {
        let n = &self.nodes[v.0];
        if n.grad.is_empty() {
            vec![0.0; n.value.len()]
        } else {
            n.grad.clone()
        }
    }

    /// Add this node's gradient into a parameter tensor's accumulator.
    pub fn accumulate_into(&self, v: Var, t: &mut Tensor) {
        let n = &self.nodes[v.0];
        assert_eq!(n.value.len(), t.grad.len());
        if n.grad.is_empty() {
            return;
        }
        for (g, d) in t.grad.iter_mut().zip(&n.grad) {
            *g += d;
        }
    }

    /// `x [B, in] · w [in, out] + b [out]`.
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Var {
        let (xs, ws, bs) = (self.shape(x), self.shape(w), self.shape(b));
        assert!(xs.len() == 2 && ws.len() == 2, "linear expects 2-d x and w");
        let (batch, fin) = (xs[0], xs[1]);
        assert_eq!(fin, ws[0], "linear inner dimension");
        let fout = ws[1];
        assert_eq!(bs, [fout], "linear bias shape");
        let mut out = vec![0.0; batch * fout];
        for row in out.chunks_mut(fout) {
            row.copy_from_slice(self.value(b));
        }
        gemm(batch, fin, fout, self.value(x), false, self.value(w), false, 1.0, &mut out);
        let rg = self.rg(&[x, w, b]);
        self.push(vec![batch, fout], out, rg, Op::Linear { x, w, b })
    }

    /// 3×3 convolution, stride 1, zero padding 1. `x [B, Ci, H, W]`,
    /// `w [Co, Ci, 3, 3]`, `b [Co]` → `[B, Co, H, W]`.
    pub fn conv3x3(&mut self, x: Var, w: Var, b: Var) -> Var {
        let xs = self.shape(x).to_vec();
        let ws = self.shape(w).to_vec();
        assert!(xs.len() == 4 && ws.len() == 4, "conv expects 4-d x and w");
        let (batch, ci, h, wd) = (xs[0], xs[1], xs[2], xs[3]);
        let co = ws[0];
        assert_eq!(ws, [co, ci, 3, 3], "conv weight shape");
        assert_eq!(self.shape(b), [co], "conv bias shape");
        let hw = h * wd;
        let mut out = vec![0.0; batch * co * hw];
        let mut cols = vec![0.0; ci * 9 * hw];
        let bias = self.value(b);
        for n in 0..batch {
            let img = &self.value(x)[n * ci * hw..(n + 1) * ci * hw];
            im2col(img, ci, h, wd, &mut cols);
            let o = &mut out[n * co * hw..(n + 1) * co * hw];
            for (c, plane) in o.chunks_mut(hw).enumerate() {
                plane.iter_mut().for_each(|v| *v = bias[c]);
            }
            gemm(co, ci * 9, hw, self.value(w), false, &cols, false, 1.0, o);
        }
        let rg = self.rg(&[x, w, b]);
        self.push(vec![batch, co, h, wd], out, rg, Op::Conv3x3 { x, w, b })
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).iter().map(|&v| v.max(0.0)).collect();
        let rg = self.rg(&[a]);
        self.push(self.shape(a).to_vec(), out, rg, Op::Relu(a))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Var {
        assert_eq!(numel(shape), self.value(a).len(), "reshape size");
        let out = self.value(a).to_vec();
        let rg = self.rg(&[a]);
        self.push(shape.to_vec(), out, rg, Op::Reshape(a))
    }

    /// Per-row column gather: `x [B, N]`, `idx` of length `B * width` →
    /// `[B, width]` with `out[b, l] = x[b, idx[b * width + l]]`.
    pub fn gather(&mut self, x: Var, idx: Vec<usize>, width: usize) -> Var {
        let xs = self.shape(x);
        assert_eq!(xs.len(), 2, "gather expects 2-d input");
        let (batch, n) = (xs[0], xs[1]);
        assert_eq!(idx.len(), batch * width, "gather index count");
        assert!(idx.iter().all(|&i| i < n), "gather index out of range");
        let xv = self.value(x);
        let out = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| xv[(k / width) * n + i])
            .collect();
        let rg = self.rg(&[x]);
        self.push(vec![batch, width], out, rg, Op::Gather { x, idx })
    }

    /// Row-wise log-softmax over the last dimension of a 2-d node.
    pub fn log_softmax(&mut self, x: Var) -> Var {
        let xs = self.shape(x).to_vec();
        assert_eq!(xs.len(), 2, "log_softmax expects 2-d input");
        let cols = xs[1];
        let mut out = self.value(x).to_vec();
        for row in out.chunks_mut(cols) {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            row.iter_mut().for_each(|v| *v -= lse);
        }
        let rg = self.rg(&[x]);
        self.push(xs, out, rg, Op::LogSoftmax(x))
    }

    /// `x [B, N]`, one column per row → `[B]`.
    pub fn pick(&mut self, x: Var, idx: Vec<usize>) -> Var {
        let xs = self.shape(x);
        assert_eq!(xs.len(), 2, "pick expects 2-d input");
        let (batch, n) = (xs[0], xs[1]);
        assert_eq!(idx.len(), batch, "pick index count");
        assert!(idx.iter().all(|&i| i < n), "pick index out of range");
        let xv = self.value(x);
        let out = idx.iter().enumerate().map(|(r, &i)| xv[r * n + i]).collect();
        let rg = self.rg(&[x]);
        self.push(vec![batch], out, rg, Op::Pick { x, idx })
    }

    fn binary(&mut self, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Var {
        assert_eq!(self.shape(a), self.shape(b), "elementwise shape mismatch");
        let out = self
            .value(a)
            .iter()
            .zip(self.value(b))
            .map(|(&x, &y)| f(x, y))
            .collect();
        let rg = self.rg(&[a, b]);
        self.push(self.shape(a).to_vec(), out, rg, op)
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let out = self.value(a).iter().map(|&x| f(x)).collect();
        let rg = self.rg(&[a]);
        self.push(self.shape(a).to_vec(), out, rg, op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn min(&mut self, a: Var, b: Var) -> Var {
        self.binary(a, b, f64::min, Op::Min(a, b))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(a, f64::exp, Op::Exp(a))
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.unary(a, |x| x * x, Op::Square(a))
    }

    pub fn scale(&mut self, a: Var, k: f64) -> Var {
        self.unary(a, |x| x * k, Op::Scale(a, k))
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        self.unary(a, |x| x.clamp(lo, hi), Op::Clamp(a, lo, hi))
    }

    /// `[B, N]` → `[B]`.
    pub fn row_sum(&mut self, a: Var) -> Var {
        let xs = self.shape(a).to_vec();
        assert_eq!(xs.len(), 2, "row_sum expects 2-d input");
        let out = self.value(a).chunks(xs[1]).map(|r| r.iter().sum()).collect();
        let rg = self.rg(&[a]);
        self.push(vec![xs[0]], out, rg, Op::RowSum(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().sum();
        let rg = self.rg(&[a]);
        self.push(vec![1], vec![s], rg, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let v = self.value(a);
        let s = v.iter().sum::<f64>() / v.len().max(1) as f64;
        let rg = self.rg(&[a]);
        self.push(vec![1], vec![s], rg, Op::Mean(a))
    }

    /// Reverse sweep from a scalar node. Gradients from an earlier call are
    /// discarded.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(NeuralError::NonScalarLoss(self.nodes[loss.0].shape.clone()));
        }
        for n in &mut self.nodes {
            n.grad.clear();
        }
        self.nodes[loss.0].grad = vec![1.0];
        for i in (0..=loss.0).rev() {
            let (before, rest) = self.nodes.split_at_mut(i);
            let node = &rest[0];
            if node.grad.is_empty() || !node.requires_grad {
                continue;
            }
            backprop(node, before);
        }
        Ok(())
    }
}

fn grad_buf(nodes: &mut [Node], v: Var) -> Option<&mut Vec<f64>> {
    let n = &mut nodes[v.0];
    if !n.requires_grad {
        return None;
    }
    if n.grad.is_empty() {
        n.grad = vec![0.0; n.value.len()];
    }
    Some(&mut n.grad)
}

fn backprop(node: &Node, nodes: &mut [Node]) {
    let g = &node.grad;
    match &node.op {
        Op::Leaf => {}
        Op::Linear { x, w, b } => {
            let (batch, fout) = (node.shape[0], node.shape[1]);
            let fin = nodes[x.0].shape[1];
            if nodes[x.0].requires_grad {
                let wv = nodes[w.0].value.clone();
                let dx = grad_buf(nodes, *x).unwrap();
                gemm(batch, fout, fin, g, false, &wv, true, 1.0, dx);
            }
            if nodes[w.0].requires_grad {
                let xv = std::mem::take(&mut nodes[x.0].value);
                let dw = grad_buf(nodes, *w).unwrap();
                gemm(fin, batch, fout, &xv, true, g, false, 1.0, dw);
                nodes[x.0].value = xv;
            }
            if let Some(db) = grad_buf(nodes, *b) {
                for row in g.chunks(fout) {
                    for (d, r) in db.iter_mut().zip(row) {
                        *d += r;
                    }
                }
            }
        }
        Op::Conv3x3 { x, w, b } => {
            let (batch, co, h, wd) = (node.shape[0], node.shape[1], node.shape[2], node.shape[3]);
            let ci = nodes[x.0].shape[1];
            let hw = h * wd;
            let need_x = nodes[x.0].requires_grad;
            let need_w = nodes[w.0].requires_grad;
            let xv = std::mem::take(&mut nodes[x.0].value);
            let wv = std::mem::take(&mut nodes[w.0].value);
            let mut cols = vec![0.0; ci * 9 * hw];
            let mut dw = if need_w { vec![0.0; wv.len()] } else { Vec::new() };
            let mut dx = if need_x { vec![0.0; xv.len()] } else { Vec::new() };
            for n in 0..batch {
                let go = &g[n * co * hw..(n + 1) * co * hw];
                if need_w {
                    im2col(&xv[n * ci * hw..(n + 1) * ci * hw], ci, h, wd, &mut cols);
                    gemm(co, hw, ci * 9, go, false, &cols, true, 1.0, &mut dw);
                }
                if need_x {
                    gemm(ci * 9, co, hw, &wv, true, go, false, 0.0, &mut cols);
                    col2im(&cols, ci, h, wd, &mut dx[n * ci * hw..(n + 1) * ci * hw]);
                }
            }
            nodes[x.0].value = xv;
            nodes[w.0].value = wv;
            if need_w {
                add_into(grad_buf(nodes, *w).unwrap(), &dw);
            }
            if need_x {
                add_into(grad_buf(nodes, *x).unwrap(), &dx);
            }
            if let Some(db) = grad_buf(nodes, *b) {
                for n in 0..batch {
                    for (c, d) in db.iter_mut().enumerate() {
                        let s = (n * co + c) * hw;
                        *d += g[s..s + hw].iter().sum::<f64>();
                    }
                }
            }
        }
        Op::Relu(a) => {
            let out = &node.value;
            if let Some(da) = grad_buf(nodes, *a) {
                for ((d, gi), o) in da.iter_mut().zip(g).zip(out) {
                    if *o > 0.0 {
                        *d += gi;
                    }
                }
            }
        }
        Op::Reshape(a) => {
            if let Some(da) = grad_buf(nodes, *a) {
                add_into(da, g);
            }
        }
        Op::Gather { x, idx } => {
            let width = node.shape[1];
            let n = nodes[x.0].shape[1];
            if let Some(dx) = grad_buf(nodes, *x) {
                for (k, &i) in idx.iter().enumerate() {
                    dx[(k / width) * n + i] += g[k];
                }
            }
        }
        Op::LogSoftmax(a) => {
            let cols = node.shape[1];
            let out = &node.value;
            if let Some(da) = grad_buf(nodes, *a) {
                for ((drow, grow), orow) in da
                    .chunks_mut(cols)
                    .zip(g.chunks(cols))
                    .zip(out.chunks(cols))
                {
                    let gs: f64 = grow.iter().sum();
                    for ((d, gi), o) in drow.iter_mut().zip(grow).zip(orow) {
                        *d += gi - o.exp() * gs;
                    }
                }
            }
        }
        Op::Pick { x, idx } => {
            let n = nodes[x.0].shape[1];
            if let Some(dx) = grad_buf(nodes, *x) {
                for (r, &i) in idx.iter().enumerate() {
                    dx[r * n + i] += g[r];
                }
            }
        }
        Op::Add(a, b) => {
            if let Some(da) = grad_buf(nodes, *a) {
                add_into(da, g);
            }
            if let Some(db) = grad_buf(nodes, *b) {
                add_into(db, g);
            }
        }
        Op::Sub(a, b) => {
            if let Some(da) = grad_buf(nodes, *a) {
                add_into(da, g);
            }
            if let Some(db) = grad_buf(nodes, *b) {
                db.iter_mut().zip(g).for_each(|(d, gi)| *d -= gi);
            }
        }
        Op::Mul(a, b) => {
            let av = nodes[a.0].value.clone();
            let bv = nodes[b.0].value.clone();
            if let Some(da) = grad_buf(nodes, *a) {
                for ((d, gi), y) in da.iter_mut().zip(g).zip(&bv) {
                    *d += gi * y;
                }
            }
            if let Some(db) = grad_buf(nodes, *b) {
                for ((d, gi), x) in db.iter_mut().zip(g).zip(&av) {
                    *d += gi * x;
                }
            }
        }
        Op::Min(a, b) => {
            let av = nodes[a.0].value.clone();
            let bv = nodes[b.0].value.clone();
            if let Some(da) = grad_buf(nodes, *a) {
                for (i, d) in da.iter_mut().enumerate() {
                    if av[i] <= bv[i] {
                        *d += g[i];
                    }
                }
            }
            if let Some(db) = grad_buf(nodes, *b) {
                for (i, d) in db.iter_mut().enumerate() {
                    if av[i] > bv[i] {
                        *d += g[i];
                    }
                }
            }
        }
        Op::Exp(a) => {
            let out = &node.value;
            if let Some(da) = grad_buf(nodes, *a) {
                for ((d, gi), o) in da.iter_mut().zip(g).zip(out) {
                    *d += gi * o;
                }
            }
        }
        Op::Square(a) => {
            let av = nodes[a.0].value.clone();
            if let Some(da) = grad_buf(nodes, *a) {
                for ((d, gi), x) in da.iter_mut().zip(g).zip(&av) {
                    *d += 2.0 * gi * x;
                }
            }
        }
        Op::Scale(a, k) => {
            if let Some(da) = grad_buf(nodes, *a) {
                da.iter_mut().zip(g).for_each(|(d, gi)| *d += gi * k);
            }
        }
        Op::Clamp(a, lo, hi) => {
            let av = nodes[a.0].value.clone();
            if let Some(da) = grad_buf(nodes, *a) {
                for ((d, gi), x) in da.iter_mut().zip(g).zip(&av) {
                    if *x > *lo && *x < *hi {
                        *d += gi;
                    }
                }
            }
        }
        Op::RowSum(a) => {
            let cols = nodes[a.0].shape[1];
            if let Some(da) = grad_buf(nodes, *a) {
                for (row, gi) in da.chunks_mut(cols).zip(g) {
                    row.iter_mut().for_each(|d| *d += gi);
                }
            }
        }
        Op::Sum(a) => {
            if let Some(da) = grad_buf(nodes, *a) {
                da.iter_mut().for_each(|d| *d += g[0]);
            }
        }
        Op::Mean(a) => {
            if let Some(da) = grad_buf(nodes, *a) {
                let k = g[0] / da.len().max(1) as f64;
                da.iter_mut().for_each(|d| *d += k);
            }
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}
