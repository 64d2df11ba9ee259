//! Reverse-mode tape over dense tensors.
//!
//! A [`Graph`] records every operation applied to its nodes. Leaves may borrow
//! their data (model parameters) so a forward pass does not copy weights.
//! [`Graph::backward`] walks the tape once in reverse and returns a
//! [`Gradients`] table indexed by [`Var`].

use std::borrow::Cow;

use super::kernels::{self, ConvGeom};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Handle to a node on a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op<T: Real> {
    Leaf,
    Fc {
        x: Var,
        w: Var,
        b: Var,
        f: usize,
        c: usize,
        g: usize,
    },
    Conv {
        x: Var,
        k: Var,
        b: Var,
        geo: ConvGeom,
    },
    LayerNorm {
        x: Var,
        w: Var,
        b: Var,
        f: usize,
        c: usize,
        xhat: Vec<T>,
        inv_std: Vec<T>,
    },
    Gelu(Var),
    Relu(Var),
    Add(Var, Var),
    Scale(Var, T),
    MatMul {
        a: Var,
        b: Var,
        m: usize,
        k: usize,
        n: usize,
        trans_b: bool,
    },
    Softmax {
        x: Var,
        rows: usize,
        cols: usize,
    },
    SliceRows {
        x: Var,
        start: usize,
        row_len: usize,
    },
    ConcatRows(Vec<Var>),
    Reshape(Var),
    Huber {
        pred: Var,
        target: Var,
        delta: T,
    },
    Mse {
        pred: Var,
        target: Var,
    },
    Sum(Var),
}

struct Node<'a, T: Real> {
    value: Cow<'a, [T]>,
    shape: Vec<usize>,
    op: Op<T>,
    tracked: bool,
}

/// Recorded computation.
pub struct Graph<'a, T: Real> {
    nodes: Vec<Node<'a, T>>,
}

impl<'a, T: Real> Default for Graph<'a, T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Gradients produced by [`Graph::backward`], one optional buffer per node.
pub struct Gradients<T: Real> {
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, v: Var) -> Option<&[T]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    /// Gradient of `v`, or zeros of length `len` if nothing flowed into it.
    pub fn get_or_zero(&self, v: Var, len: usize) -> Vec<T> {
        self.get(v).map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); len])
    }

    pub fn take(&mut self, v: Var) -> Option<Vec<T>> {
        self.grads.get_mut(v.0).and_then(Option::take)
    }
}

impl<'a, T: Real> Graph<'a, T> {
    pub fn new() -> Self {
        Graph {
            nodes: Vec::with_capacity(64),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Cow<'a, [T]>, shape: Vec<usize>, op: Op<T>, tracked: bool) -> Var {
        debug_assert_eq!(value.len(), shape.iter().product::<usize>());
        self.nodes.push(Node {
            value,
            shape,
            op,
            tracked,
        });
        Var(self.nodes.len() - 1)
    }

    fn tracked(&self, vs: &[Var]) -> bool {
        vs.iter().any(|v| self.nodes[v.0].tracked)
    }

    /// Borrowed leaf, typically a model parameter.
    pub fn param(&mut self, t: &'a Tensor<T>) -> Var {
        self.push(Cow::Borrowed(t.data()), t.shape().to_vec(), Op::Leaf, t.requires_grad)
    }

    /// Owned leaf.
    pub fn leaf(&mut self, t: Tensor<T>, requires_grad: bool) -> Var {
        let shape = t.shape().to_vec();
        self.push(Cow::Owned(t.into_data()), shape, Op::Leaf, requires_grad)
    }

    /// Borrowed leaf from raw parts; `requires_grad` decides whether gradients flow to it.
    pub fn leaf_slice(&mut self, data: &'a [T], shape: &[usize], requires_grad: bool) -> Result<Var> {
        if data.len() != shape.iter().product::<usize>() {
            return Err(Error::shape("leaf_slice", shape, &[data.len()]));
        }
        Ok(self.push(Cow::Borrowed(data), shape.to_vec(), Op::Leaf, requires_grad))
    }

    pub fn value(&self, v: Var) -> &[T] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn tensor(&self, v: Var) -> Tensor<T> {
        Tensor::new(self.shape(v), self.value(v).to_vec()).expect("graph node shape is consistent")
    }

    /// Scalar value of a one-element node.
    pub fn scalar(&self, v: Var) -> T {
        self.value(v)[0]
    }

    /// Per-channel affine map: `x` is `F x ...` (trailing axes flattened), `w` is `G x F`, `b` is `G`.
    pub fn fully_connected(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ws = self.shape(w).to_vec();
        let bs = self.shape(b).to_vec();
        if ws.len() != 2 || xs.is_empty() || ws[1] != xs[0] {
            return Err(Error::shape("fully_connected (W vs x)", &ws, &xs));
        }
        if bs.iter().product::<usize>() != ws[0] {
            return Err(Error::shape("fully_connected (b vs W)", &bs, &ws));
        }
        let (f, g) = (xs[0], ws[0]);
        let c: usize = xs[1..].iter().product();
        let y = kernels::fc_forward(self.value(x), self.value(w), self.value(b), f, c, g);
        let mut shape = xs.clone();
        shape[0] = g;
        let tracked = self.tracked(&[x, w, b]);
        Ok(self.push(Cow::Owned(y), shape, Op::Fc { x, w, b, f, c, g }, tracked))
    }

    /// "Same" 2-D convolution: `x` is `H x W x Cin`, `k` is `kh x kw x Cin x Cout`, `b` is `Cout`.
    pub fn conv2d(&mut self, x: Var, k: Var, b: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ks = self.shape(k).to_vec();
        let bs = self.shape(b).to_vec();
        if xs.len() != 3 || ks.len() != 4 {
            return Err(Error::shape("conv2d (rank)", &xs, &ks));
        }
        if ks[2] != xs[2] {
            return Err(Error::shape("conv2d (input channels)", &xs, &ks));
        }
        if bs.iter().product::<usize>() != ks[3] {
            return Err(Error::shape("conv2d (bias)", &bs, &ks));
        }
        let geo = ConvGeom {
            h: xs[0],
            w: xs[1],
            cin: xs[2],
            kh: ks[0],
            kw: ks[1],
            cout: ks[3],
        };
        let y = kernels::conv2d_forward(self.value(x), self.value(k), self.value(b), geo);
        let tracked = self.tracked(&[x, k, b]);
        Ok(self.push(
            Cow::Owned(y),
            vec![geo.h, geo.w, geo.cout],
            Op::Conv { x, k, b, geo },
            tracked,
        ))
    }

    /// Normalizes over the leading axis for every trailing index, eps = 1e-5.
    pub fn layer_norm(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let f = xs[0];
        if f < 2 {
            return Err(Error::invalid(format!(
                "layer_norm needs a leading extent >= 2, got {xs:?}"
            )));
        }
        if self.value(w).len() != f || self.value(b).len() != f {
            return Err(Error::shape("layer_norm (w/b vs x)", self.shape(w), &xs));
        }
        let c: usize = xs[1..].iter().product();
        let (y, xhat, inv_std) =
            kernels::layer_norm_forward(self.value(x), self.value(w), self.value(b), f, c, T::lit(1e-5));
        let tracked = self.tracked(&[x, w, b]);
        Ok(self.push(
            Cow::Owned(y),
            xs,
            Op::LayerNorm {
                x,
                w,
                b,
                f,
                c,
                xhat,
                inv_std,
            },
            tracked,
        ))
    }

    pub fn gelu(&mut self, x: Var) -> Var {
        let y = self.value(x).iter().map(|&v| kernels::gelu(v)).collect();
        let shape = self.shape(x).to_vec();
        let tracked = self.tracked(&[x]);
        self.push(Cow::Owned(y), shape, Op::Gelu(x), tracked)
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let y = self
            .value(x)
            .iter()
            .map(|&v| if v > T::zero() { v } else { T::zero() })
            .collect();
        let shape = self.shape(x).to_vec();
        let tracked = self.tracked(&[x]);
        self.push(Cow::Owned(y), shape, Op::Relu(x), tracked)
    }

    /// Elementwise sum of equal-size nodes (the result takes `a`'s shape).
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.value(a).len() != self.value(b).len() {
            return Err(Error::shape("add", self.shape(a), self.shape(b)));
        }
        let y = self.value(a).iter().zip(self.value(b)).map(|(&p, &q)| p + q).collect();
        let shape = self.shape(a).to_vec();
        let tracked = self.tracked(&[a, b]);
        Ok(self.push(Cow::Owned(y), shape, Op::Add(a, b), tracked))
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let y = self.value(a).iter().map(|&v| v * s).collect();
        let shape = self.shape(a).to_vec();
        let tracked = self.tracked(&[a]);
        self.push(Cow::Owned(y), shape, Op::Scale(a, s), tracked)
    }

    /// Matrix product of rank-2 nodes; with `trans_b`, `b` is used transposed.
    pub fn matmul(&mut self, a: Var, b: Var, trans_b: bool) -> Result<Var> {
        let as_ = self.shape(a).to_vec();
        let bs = self.shape(b).to_vec();
        if as_.len() != 2 || bs.len() != 2 {
            return Err(Error::shape("matmul (rank)", &as_, &bs));
        }
        let (m, k) = (as_[0], as_[1]);
        let (kb, n) = if trans_b { (bs[1], bs[0]) } else { (bs[0], bs[1]) };
        if k != kb {
            return Err(Error::shape("matmul", &as_, &bs));
        }
        let y = kernels::matmul(self.value(a), self.value(b), m, k, n, trans_b);
        let tracked = self.tracked(&[a, b]);
        Ok(self.push(
            Cow::Owned(y),
            vec![m, n],
            Op::MatMul { a, b, m, k, n, trans_b },
            tracked,
        ))
    }

    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        if xs.len() != 2 {
            return Err(Error::shape("softmax_rows (rank 2)", &xs, &[]));
        }
        let (rows, cols) = (xs[0], xs[1]);
        let y = kernels::softmax_rows(self.value(x), rows, cols);
        let tracked = self.tracked(&[x]);
        Ok(self.push(Cow::Owned(y), xs, Op::Softmax { x, rows, cols }, tracked))
    }

    /// Rows `start..start+len` along the leading axis.
    pub fn slice_rows(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        if len == 0 || start + len > xs[0] {
            return Err(Error::invalid(format!(
                "slice_rows {start}..{} out of range for shape {xs:?}",
                start + len
            )));
        }
        let row_len: usize = xs[1..].iter().product();
        let y = self.value(x)[start * row_len..(start + len) * row_len].to_vec();
        let mut shape = xs;
        shape[0] = len;
        let tracked = self.tracked(&[x]);
        Ok(self.push(Cow::Owned(y), shape, Op::SliceRows { x, start, row_len }, tracked))
    }

    /// Concatenation along the leading axis.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = parts.first().ok_or_else(|| Error::invalid("concat_rows of nothing"))?;
        let tail = self.shape(*first)[1..].to_vec();
        let mut rows = 0;
        let mut y = Vec::new();
        for &p in parts {
            if self.shape(p)[1..] != tail[..] {
                return Err(Error::shape("concat_rows", self.shape(*first), self.shape(p)));
            }
            rows += self.shape(p)[0];
            y.extend_from_slice(self.value(p));
        }
        let mut shape = vec![rows];
        shape.extend(tail);
        let tracked = self.tracked(parts);
        Ok(self.push(Cow::Owned(y), shape, Op::ConcatRows(parts.to_vec()), tracked))
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var> {
        if shape.iter().product::<usize>() != self.value(x).len() {
            return Err(Error::shape("reshape", self.shape(x), shape));
        }
        let y = self.value(x).to_vec();
        let tracked = self.tracked(&[x]);
        Ok(self.push(Cow::Owned(y), shape.to_vec(), Op::Reshape(x), tracked))
    }

    /// Mean Huber loss with transition `delta`.
    pub fn huber_loss(&mut self, pred: Var, target: Var, delta: T) -> Result<Var> {
        if delta <= T::zero() {
            return Err(Error::invalid("Huber delta must be positive"));
        }
        if self.value(pred).len() != self.value(target).len() {
            return Err(Error::shape("huber_loss", self.shape(pred), self.shape(target)));
        }
        let n = T::from_usize(self.value(pred).len()).unwrap();
        let s: T = self
            .value(pred)
            .iter()
            .zip(self.value(target))
            .map(|(&p, &t)| super::loss::huber(p - t, delta))
            .sum();
        let tracked = self.tracked(&[pred, target]);
        Ok(self.push(
            Cow::Owned(vec![s / n]),
            vec![1],
            Op::Huber { pred, target, delta },
            tracked,
        ))
    }

    /// Mean squared error.
    pub fn mse_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        if self.value(pred).len() != self.value(target).len() {
            return Err(Error::shape("mse_loss", self.shape(pred), self.shape(target)));
        }
        let n = T::from_usize(self.value(pred).len()).unwrap();
        let s: T = self
            .value(pred)
            .iter()
            .zip(self.value(target))
            .map(|(&p, &t)| (p - t) * (p - t))
            .sum();
        let tracked = self.tracked(&[pred, target]);
        Ok(self.push(Cow::Owned(vec![s / n]), vec![1], Op::Mse { pred, target }, tracked))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let s: T = self.value(x).iter().copied().sum();
        let tracked = self.tracked(&[x]);
        self.push(Cow::Owned(vec![s]), vec![1], Op::Sum(x), tracked)
    }

    /// Reverse sweep from a one-element node.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if self.value(loss).len() != 1 {
            return Err(Error::invalid(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        for idx in (0..=loss.0).rev() {
            let Some(gy) = grads[idx].take() else {
                continue;
            };
            let node = &self.nodes[idx];
            if !node.tracked {
                continue;
            }
            self.propagate(&node.op, &node.value, &gy, &mut grads);
            grads[idx] = Some(gy);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, op: &Op<T>, y: &[T], gy: &[T], grads: &mut [Option<Vec<T>>]) {
        match op {
            Op::Leaf => {}
            Op::Fc { x, w, b, f, c, g } => {
                let mut gx = self.buf_for(*x, grads);
                let mut gw = self.buf_for(*w, grads);
                let mut gb = self.buf_for(*b, grads);
                kernels::fc_backward(
                    self.value(*x),
                    self.value(*w),
                    gy,
                    *f,
                    *c,
                    *g,
                    gx.as_deref_mut(),
                    gw.as_deref_mut(),
                    gb.as_deref_mut(),
                );
                self.store(*x, gx, grads);
                self.store(*w, gw, grads);
                self.store(*b, gb, grads);
            }
            Op::Conv { x, k, b, geo } => {
                let mut gx = self.buf_for(*x, grads);
                let mut gk = self.buf_for(*k, grads);
                let mut gb = self.buf_for(*b, grads);
                kernels::conv2d_backward(
                    self.value(*x),
                    self.value(*k),
                    gy,
                    *geo,
                    gx.as_deref_mut(),
                    gk.as_deref_mut(),
                    gb.as_deref_mut(),
                );
                self.store(*x, gx, grads);
                self.store(*k, gk, grads);
                self.store(*b, gb, grads);
            }
            Op::LayerNorm {
                x,
                w,
                b,
                f,
                c,
                xhat,
                inv_std,
            } => {
                let mut gx = self.buf_for(*x, grads);
                let mut gw = self.buf_for(*w, grads);
                let mut gb = self.buf_for(*b, grads);
                kernels::layer_norm_backward(
                    xhat,
                    inv_std,
                    self.value(*w),
                    gy,
                    *f,
                    *c,
                    gx.as_deref_mut(),
                    gw.as_deref_mut(),
                    gb.as_deref_mut(),
                );
                self.store(*x, gx, grads);
                self.store(*w, gw, grads);
                self.store(*b, gb, grads);
            }
            Op::Gelu(x) => {
                self.accumulate(*x, grads, |gx, xv| {
                    for ((g, &xi), &go) in gx.iter_mut().zip(xv).zip(gy) {
                        *g += go * kernels::gelu_grad(xi);
                    }
                });
            }
            Op::Relu(x) => {
                self.accumulate(*x, grads, |gx, xv| {
                    for ((g, &xi), &go) in gx.iter_mut().zip(xv).zip(gy) {
                        if xi > T::zero() {
                            *g += go;
                        }
                    }
                });
            }
            Op::Add(a, b) => {
                for v in [a, b] {
                    self.accumulate(*v, grads, |gx, _| {
                        for (g, &go) in gx.iter_mut().zip(gy) {
                            *g += go;
                        }
                    });
                }
            }
            Op::Scale(a, s) => {
                self.accumulate(*a, grads, |gx, _| {
                    for (g, &go) in gx.iter_mut().zip(gy) {
                        *g += go * *s;
                    }
                });
            }
            Op::MatMul { a, b, m, k, n, trans_b } => {
                let (m, k, n) = (*m, *k, *n);
                let av = self.value(*a);
                let bv = self.value(*b);
                // dA = dY * B^T (B as used), dB = A^T * dY
                self.accumulate(*a, grads, |ga, _| {
                    for i in 0..m {
                        for p in 0..k {
                            let mut s = T::zero();
                            for j in 0..n {
                                let bij = if *trans_b { bv[j * k + p] } else { bv[p * n + j] };
                                s += gy[i * n + j] * bij;
                            }
                            ga[i * k + p] += s;
                        }
                    }
                });
                self.accumulate(*b, grads, |gb, _| {
                    for i in 0..m {
                        for p in 0..k {
                            let aip = av[i * k + p];
                            for j in 0..n {
                                let idx = if *trans_b { j * k + p } else { p * n + j };
                                gb[idx] += aip * gy[i * n + j];
                            }
                        }
                    }
                });
            }
            Op::Softmax { x, rows, cols } => {
                let (rows, cols) = (*rows, *cols);
                self.accumulate(*x, grads, |gx, _| {
                    for r in 0..rows {
                        let yr = &y[r * cols..(r + 1) * cols];
                        let gr = &gy[r * cols..(r + 1) * cols];
                        let s: T = yr.iter().zip(gr).map(|(&a, &b)| a * b).sum();
                        for c in 0..cols {
                            gx[r * cols + c] += yr[c] * (gr[c] - s);
                        }
                    }
                });
            }
            Op::SliceRows { x, start, row_len } => {
                let off = start * row_len;
                self.accumulate(*x, grads, |gx, _| {
                    for (g, &go) in gx[off..off + gy.len()].iter_mut().zip(gy) {
                        *g += go;
                    }
                });
            }
            Op::ConcatRows(parts) => {
                let mut off = 0;
                for &p in parts {
                    let len = self.value(p).len();
                    self.accumulate(p, grads, |gx, _| {
                        for (g, &go) in gx.iter_mut().zip(&gy[off..off + len]) {
                            *g += go;
                        }
                    });
                    off += len;
                }
            }
            Op::Reshape(x) => {
                self.accumulate(*x, grads, |gx, _| {
                    for (g, &go) in gx.iter_mut().zip(gy) {
                        *g += go;
                    }
                });
            }
            Op::Huber { pred, target, delta } => {
                let pv = self.value(*pred);
                let tv = self.value(*target);
                let n = T::from_usize(pv.len()).unwrap();
                let scale = gy[0] / n;
                let slope = |i: usize| super::loss::huber_grad(pv[i] - tv[i], *delta) * scale;
                self.accumulate(*pred, grads, |g, _| {
                    for (i, gi) in g.iter_mut().enumerate() {
                        *gi += slope(i);
                    }
                });
                self.accumulate(*target, grads, |g, _| {
                    for (i, gi) in g.iter_mut().enumerate() {
                        *gi -= slope(i);
                    }
                });
            }
            Op::Mse { pred, target } => {
                let pv = self.value(*pred);
                let tv = self.value(*target);
                let n = T::from_usize(pv.len()).unwrap();
                let scale = T::lit(2.0) * gy[0] / n;
                self.accumulate(*pred, grads, |g, _| {
                    for (i, gi) in g.iter_mut().enumerate() {
                        *gi += (pv[i] - tv[i]) * scale;
                    }
                });
                self.accumulate(*target, grads, |g, _| {
                    for (i, gi) in g.iter_mut().enumerate() {
                        *gi -= (pv[i] - tv[i]) * scale;
                    }
                });
            }
            Op::Sum(x) => {
                self.accumulate(*x, grads, |g, _| {
                    for gi in g.iter_mut() {
                        *gi += gy[0];
                    }
                });
            }
        }
    }

    /// Gradient buffer for `v`, created on demand, or `None` if `v` is not tracked.
    fn buf_for(&self, v: Var, grads: &mut [Option<Vec<T>>]) -> Option<Vec<T>> {
        if !self.nodes[v.0].tracked {
            return None;
        }
        Some(
            grads[v.0]
                .take()
                .unwrap_or_else(|| vec![T::zero(); self.nodes[v.0].value.len()]),
        )
    }

    fn store(&self, v: Var, buf: Option<Vec<T>>, grads: &mut [Option<Vec<T>>]) {
        if let Some(b) = buf {
            grads[v.0] = Some(b);
        }
    }

    fn accumulate(&self, v: Var, grads: &mut [Option<Vec<T>>], f: impl FnOnce(&mut [T], &[T])) {
        if let Some(mut buf) = self.buf_for(v, grads) {
            f(&mut buf, self.value(v));
            grads[v.0] = Some(buf);
        }
    }
}
