use super::{forward_graph, ModelWeights};
use crate::error::{Error, Result};
use crate::nn::{Graph, Tensor};
use crate::scalar::Real;

/// Attention statistics of a batch: per-head mean |head output| (n x 2)
/// and the probability matrices of the last pass.
#[derive(Debug, Clone)]
pub struct AttentionProbe<T: Real> {
    pub mean_abs_output: Vec<Tensor<T>>,
    pub last_probs: Vec<Tensor<T>>,
}

impl<T: Real> AttentionProbe<T> {
    /// max/min ratio of a head's mean magnitude profile.
    pub fn spread(&self, head: usize) -> f64 {
        let d = self.mean_abs_output[head].data();
        let max = d.iter().fold(f64::MIN, |m, v| m.max(v.as_f64()));
        let min = d.iter().fold(f64::MAX, |m, v| m.min(v.as_f64()));
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    }
}

pub fn attention_probe_run<T: Real>(w: &ModelWeights<T>, inputs: &[Tensor<T>]) -> Result<AttentionProbe<T>> {
    if inputs.is_empty() {
        return Err(Error::invalid("attention probe needs at least one input"));
    }
    let mut sums: Vec<Vec<T>> = Vec::new();
    let mut shapes = Vec::new();
    let mut last = Vec::new();
    for x in inputs {
        let mut g = Graph::new();
        let xv = g.param(x);
        let f = forward_graph(&mut g, w, xv, false)?;
        if sums.is_empty() {
            for h in &f.attention.heads {
                sums.push(vec![T::zero(); g.value(h.output).len()]);
                shapes.push(g.shape(h.output).to_vec());
            }
        }
        for (s, h) in sums.iter_mut().zip(&f.attention.heads) {
            for (a, v) in s.iter_mut().zip(g.value(h.output)) {
                *a += v.abs();
            }
        }
        last = f.attention.heads.iter().map(|h| g.tensor(h.probs)).collect();
    }
    let n = T::from_usize(inputs.len()).unwrap();
    let mean_abs_output = sums
        .into_iter()
        .zip(&shapes)
        .map(|(s, shape)| Tensor::new(shape, s.into_iter().map(|v| v / n).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(AttentionProbe {
        mean_abs_output,
        last_probs: last,
    })
}
