//! Tensor-in, tensor-out wrappers around single graph operations.

use super::attention;
use super::graph::Graph;
use super::tensor::Tensor;
use crate::error::Result;
use crate::scalar::Real;

pub fn fully_connected<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let mut g = Graph::new();
    let (xv, wv, bv) = (g.param(x), g.param(w), g.param(b));
    let y = g.fully_connected(xv, wv, bv)?;
    Ok(g.tensor(y))
}

pub fn conv2d<T: Real>(x: &Tensor<T>, k: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let mut g = Graph::new();
    let (xv, kv, bv) = (g.param(x), g.param(k), g.param(b));
    let y = g.conv2d(xv, kv, bv)?;
    Ok(g.tensor(y))
}

pub fn layer_norm<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let mut g = Graph::new();
    let (xv, wv, bv) = (g.param(x), g.param(w), g.param(b));
    let y = g.layer_norm(xv, wv, bv)?;
    Ok(g.tensor(y))
}

pub fn gelu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let mut g = Graph::new();
    let xv = g.param(x);
    let y = g.gelu(xv);
    g.tensor(y)
}

pub fn relu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    let mut g = Graph::new();
    let xv = g.param(x);
    let y = g.relu(xv);
    g.tensor(y)
}

pub fn softmax_rows<T: Real>(x: &Tensor<T>) -> Result<Tensor<T>> {
    let mut g = Graph::new();
    let xv = g.param(x);
    let y = g.softmax_rows(xv)?;
    Ok(g.tensor(y))
}

/// Returns `(output, probabilities)`.
pub fn scaled_dot_product_attention<T: Real>(
    q: &Tensor<T>,
    k: &Tensor<T>,
    v: &Tensor<T>,
    d_k: T,
) -> Result<(Tensor<T>, Tensor<T>)> {
    let mut g = Graph::new();
    let (qv, kv, vv) = (g.param(q), g.param(k), g.param(v));
    let h = attention::scaled_dot_product_attention(&mut g, qv, kv, vv, d_k)?;
    Ok((g.tensor(h.output), g.tensor(h.probs)))
}

pub fn multi_head_attention<T: Real>(
    y: &Tensor<T>,
    n_heads: usize,
    w_o: &Tensor<T>,
    b_o: &Tensor<T>,
) -> Result<Tensor<T>> {
    let mut g = Graph::new();
    let (yv, wv, bv) = (g.param(y), g.param(w_o), g.param(b_o));
    let out = attention::multi_head_attention(&mut g, yv, n_heads, wv, bv)?;
    Ok(g.tensor(out.output))
}
