use super::graph::{Graph, Var};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Result of one scaled dot-product attention head.
#[derive(Debug, Clone, Copy)]
pub struct HeadOutput {
    /// `softmax(Q K^T / sqrt(d_k)) V`
    pub output: Var,
    /// Row-stochastic `N x N` probability matrix.
    pub probs: Var,
}

/// Multi-head attention result; `output` is after the projection layer.
#[derive(Debug, Clone)]
pub struct MultiHeadOutput {
    pub output: Var,
    pub concat: Var,
    pub heads: Vec<HeadOutput>,
}

/// `softmax(Q K^T / sqrt(d_k)) V` for `N x D` inputs.
pub fn scaled_dot_product_attention<T: Real>(
    g: &mut Graph<'_, T>,
    q: Var,
    k: Var,
    v: Var,
    d_k: T,
) -> Result<HeadOutput> {
    if !(d_k > T::zero()) {
        return Err(Error::invalid(format!(
            "attention scale d_k must be positive, got {d_k}"
        )));
    }
    if g.shape(q) != g.shape(k) || g.shape(q) != g.shape(v) {
        return Err(Error::shape("attention (Q/K/V)", g.shape(q), g.shape(k)));
    }
    let scores = g.matmul(q, k, true)?;
    let scaled = g.scale(scores, d_k.sqrt().recip());
    let probs = g.softmax_rows(scaled)?;
    let output = g.matmul(probs, v, false)?;
    Ok(HeadOutput { output, probs })
}

/// Splits `y` (rows `3 * n_heads * n`) contiguously into `[K | Q | V]`, each block into
/// `n_heads` contiguous head slices of `n` rows, attends per head with `d_k = n`,
/// concatenates head outputs head-major and applies the projection `w_o`, `b_o`.
pub fn multi_head_attention<T: Real>(
    g: &mut Graph<'_, T>,
    y: Var,
    n_heads: usize,
    w_o: Var,
    b_o: Var,
) -> Result<MultiHeadOutput> {
    let shape = g.shape(y).to_vec();
    if shape.len() != 2 {
        return Err(Error::shape("multi_head_attention (rank 2)", &shape, &[]));
    }
    if n_heads == 0 || !shape[0].is_multiple_of(3 * n_heads) {
        return Err(Error::invalid(format!(
            "multi_head_attention: leading extent {} not divisible by 3 * {n_heads}",
            shape[0]
        )));
    }
    let block = shape[0] / 3;
    let n = block / n_heads;
    let d_k = T::from_usize(n).unwrap();
    let mut heads = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let k = g.slice_rows(y, h * n, n)?;
        let q = g.slice_rows(y, block + h * n, n)?;
        let v = g.slice_rows(y, 2 * block + h * n, n)?;
        heads.push(scaled_dot_product_attention(g, q, k, v, d_k)?);
    }
    let outs: Vec<Var> = heads.iter().map(|h| h.output).collect();
    let concat = g.concat_rows(&outs)?;
    let output = g.fully_connected(concat, w_o, b_o)?;
    Ok(MultiHeadOutput { output, concat, heads })
}
