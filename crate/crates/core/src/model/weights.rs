use rand::Rng;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::nn::{glorot_uniform, Tensor};
use crate::rng::{rng_for, streams, SimRng};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Init {
    /// Glorot-uniform with (fan_in, fan_out)
    Glorot(usize, usize),
    Zeros,
    Ones,
}

/// A named parameter tensor with an optional keep-mask (false = pruned).
#[derive(Debug, Clone, PartialEq)]
pub struct NamedParam<T: Real> {
    pub name: String,
    pub tensor: Tensor<T>,
    pub mask: Option<Vec<bool>>,
}

/// All parameters of one network, in fixed enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights<T: Real> {
    pub config: ModelConfig,
    pub params: Vec<NamedParam<T>>,
}

/// (name, shape, init) for every parameter of `config`, in order.
fn layout(config: &ModelConfig) -> Vec<(String, Vec<usize>, Init)> {
    let f = config.input_rows();
    let mut v: Vec<(String, Vec<usize>, Init)> = Vec::new();
    let fc = |v: &mut Vec<_>, name: &str, out: usize, inp: usize| {
        v.push((format!("{name}.w"), vec![out, inp], Init::Glorot(inp, out)));
        v.push((format!("{name}.b"), vec![out], Init::Zeros));
    };
    let conv = |v: &mut Vec<(String, Vec<usize>, Init)>, name: &str, k: usize, cin: usize, cout: usize| {
        v.push((
            format!("{name}.k"),
            vec![k, k, cin, cout],
            Init::Glorot(k * k * cin, k * k * cout),
        ));
        v.push((format!("{name}.b"), vec![cout], Init::Zeros));
    };
    let norm = |v: &mut Vec<(String, Vec<usize>, Init)>, name: &str, len: usize| {
        v.push((format!("{name}.w"), vec![len], Init::Ones));
        v.push((format!("{name}.b"), vec![len], Init::Zeros));
    };
    fc(&mut v, "enc.fc1", 3 * f, f);
    fc(&mut v, "enc.fc2", f, f);
    norm(&mut v, "enc.norm1", f);
    conv(&mut v, "enc.prenet.conv1", 2, 1, config.n_enc);
    conv(&mut v, "enc.prenet.conv2", 2, config.n_enc, 1);
    norm(&mut v, "enc.norm2", f);
    let (k, d) = (config.kernel, config.n_dec);
    conv(&mut v, "dec.conv_in", k, 1, d);
    for b in 0..config.k_blocks {
        conv(&mut v, &format!("dec.block{b}.conv1"), k, d, d);
        conv(&mut v, &format!("dec.block{b}.conv2"), k, d, d);
        norm(&mut v, &format!("dec.block{b}.norm"), f);
    }
    fc(&mut v, "dec.fc_up", config.out_rows(), f);
    conv(&mut v, "dec.conv_out", k, d, 1);
    v
}

impl<T: Real> ModelWeights<T> {
    /// Fresh weights: Glorot-uniform kernels/matrices, zero biases, unit norm gains.
    pub fn build(config: &ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng: SimRng = rng_for(seed, streams::INIT);
        let params = layout(config)
            .into_iter()
            .map(|(name, shape, init)| {
                let n: usize = shape.iter().product();
                let data = match init {
                    Init::Glorot(fi, fo) => glorot_uniform(n, fi, fo, &mut rng),
                    Init::Zeros => vec![T::zero(); n],
                    Init::Ones => vec![T::one(); n],
                };
                Ok(NamedParam {
                    name,
                    tensor: Tensor::new(&shape, data)?,
                    mask: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelWeights {
            config: config.clone(),
            params,
        })
    }

    /// Check names and shapes against the layout implied by `config`.
    pub fn check_layout(&self) -> Result<()> {
        let expect = layout(&self.config);
        if expect.len() != self.params.len() {
            return Err(Error::invalid(format!(
                "weights have {} tensors, config expects {}",
                self.params.len(),
                expect.len()
            )));
        }
        for ((name, shape, _), p) in expect.iter().zip(&self.params) {
            if *name != p.name || shape.as_slice() != p.tensor.shape() {
                return Err(Error::invalid(format!(
                    "weights tensor {} {:?} does not match expected {name} {shape:?}",
                    p.name,
                    p.tensor.shape()
                )));
            }
            if let Some(m) = &p.mask {
                if m.len() != p.tensor.len() {
                    return Err(Error::shape("mask", &[m.len()], p.tensor.shape()));
                }
            }
        }
        Ok(())
    }

    pub fn count_parameters(&self) -> usize {
        self.params.iter().map(|p| p.tensor.len()).sum()
    }

    /// Parameters whose name starts with `prefix` (e.g. "enc." or "dec.").
    pub fn count_region(&self, prefix: &str) -> usize {
        self.params
            .iter()
            .filter(|p| p.name.starts_with(prefix))
            .map(|p| p.tensor.len())
            .sum()
    }

    /// Parameters not masked out.
    pub fn count_kept(&self) -> usize {
        self.params
            .iter()
            .map(|p| match &p.mask {
                Some(m) => m.iter().filter(|k| **k).count(),
                None => p.tensor.len(),
            })
            .sum()
    }

    pub fn get(&self, name: &str) -> Option<&NamedParam<T>> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut NamedParam<T>> {
        self.params.iter_mut().find(|p| p.name == name)
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor<T>> {
        self.get(name)
            .map(|p| &p.tensor)
            .ok_or_else(|| Error::invalid(format!("no parameter named {name}")))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.params.iter().map(|p| p.tensor.len()).collect()
    }

    pub fn masks(&self) -> Vec<Option<Vec<bool>>> {
        self.params.iter().map(|p| p.mask.clone()).collect()
    }

    pub fn has_masks(&self) -> bool {
        self.params.iter().any(|p| p.mask.is_some())
    }

    /// Zero every masked-out entry.
    pub fn apply_masks(&mut self) {
        for p in &mut self.params {
            if let Some(m) = &p.mask {
                for (v, keep) in p.tensor.data_mut().iter_mut().zip(m) {
                    if !keep {
                        *v = T::zero();
                    }
                }
            }
        }
    }

    pub fn cast<U: Real>(&self) -> ModelWeights<U> {
        ModelWeights {
            config: self.config.clone(),
            params: self
                .params
                .iter()
                .map(|p| NamedParam {
                    name: p.name.clone(),
                    tensor: p.tensor.cast(),
                    mask: p.mask.clone(),
                })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.tensor.is_finite())
    }

    /// Small random perturbation of every kept entry (used by tests and diagnostics).
    pub fn jitter<R: Rng + ?Sized>(&mut self, scale: f64, rng: &mut R) {
        for p in &mut self.params {
            let mask = p.mask.clone();
            for (j, v) in p.tensor.data_mut().iter_mut().enumerate() {
                if mask.as_ref().is_none_or(|m| m[j]) {
                    *v += T::lit(rng.random_range(-scale..scale));
                }
            }
        }
    }
}
