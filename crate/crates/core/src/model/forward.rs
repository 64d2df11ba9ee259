use super::{ModelConfig, ModelWeights};
use crate::error::{Error, Result};
use crate::nn::attention::{multi_head_attention, MultiHeadOutput};
use crate::nn::{Graph, Tensor, Var};
use crate::scalar::Real;

/// Handles into a recorded forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// `out_rows x 2`
    pub output: Var,
    /// encoder output, `rows x 2 x 1`
    pub encoded: Var,
    pub attention: MultiHeadOutput,
    /// one var per parameter, in `ModelWeights::params` order
    pub params: Vec<Var>,
}

struct P<'w> {
    names: Vec<&'w str>,
    vars: Vec<Var>,
}

impl P<'_> {
    fn get(&self, name: &str) -> Var {
        let i = self.names.iter().position(|n| *n == name).expect("layout checked");
        self.vars[i]
    }
}

/// Record the encoder + decoder on `g`. With `track`, gradients flow to
/// every parameter; `x` is the marshalled `rows x 2` input.
pub fn forward_graph<'a, T: Real>(
    g: &mut Graph<'a, T>,
    w: &'a ModelWeights<T>,
    x: Var,
    track: bool,
) -> Result<Forward> {
    let cfg: &ModelConfig = &w.config;
    let rows = cfg.input_rows();
    if g.shape(x) != [rows, 2] {
        return Err(Error::shape("channelformer input", g.shape(x), &[rows, 2]));
    }
    let mut p = P {
        names: Vec::new(),
        vars: Vec::new(),
    };
    for np in &w.params {
        p.names.push(&np.name);
        p.vars.push(g.leaf_slice(np.tensor.data(), np.tensor.shape(), track)?);
    }

    // encoder
    let y = g.fully_connected(x, p.get("enc.fc1.w"), p.get("enc.fc1.b"))?;
    let attention = multi_head_attention(g, y, cfg.n_heads, p.get("enc.fc2.w"), p.get("enc.fc2.b"))?;
    let s = g.add(attention.output, x)?;
    let n1 = g.layer_norm(s, p.get("enc.norm1.w"), p.get("enc.norm1.b"))?;
    let n1 = g.reshape(n1, &[rows, 2, 1])?;
    let c = g.conv2d(n1, p.get("enc.prenet.conv1.k"), p.get("enc.prenet.conv1.b"))?;
    let c = g.gelu(c);
    let c = g.conv2d(c, p.get("enc.prenet.conv2.k"), p.get("enc.prenet.conv2.b"))?;
    let s = g.add(c, n1)?;
    let encoded = g.layer_norm(s, p.get("enc.norm2.w"), p.get("enc.norm2.b"))?;

    // decoder
    let mut d = g.conv2d(encoded, p.get("dec.conv_in.k"), p.get("dec.conv_in.b"))?;
    for b in 0..cfg.k_blocks {
        let pre = format!("dec.block{b}");
        let c = g.conv2d(d, p.get(&format!("{pre}.conv1.k")), p.get(&format!("{pre}.conv1.b")))?;
        let c = g.relu(c);
        let c = g.conv2d(c, p.get(&format!("{pre}.conv2.k")), p.get(&format!("{pre}.conv2.b")))?;
        let s = g.add(c, d)?;
        d = g.layer_norm(s, p.get(&format!("{pre}.norm.w")), p.get(&format!("{pre}.norm.b")))?;
    }
    // shared upsampling matrix applied to every (re/im, feature map) column
    let u = g.fully_connected(d, p.get("dec.fc_up.w"), p.get("dec.fc_up.b"))?;
    let o = g.conv2d(u, p.get("dec.conv_out.k"), p.get("dec.conv_out.b"))?;
    let output = g.reshape(o, &[cfg.out_rows(), 2])?;
    Ok(Forward {
        output,
        encoded,
        attention,
        params: p.vars,
    })
}

impl<T: Real> ModelWeights<T> {
    /// Inference on one marshalled input.
    pub fn predict(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = Graph::new();
        let xv = g.param(x);
        let f = forward_graph(&mut g, self, xv, false)?;
        Ok(g.tensor(f.output))
    }

    /// Encoder output only (`rows x 2 x 1`).
    pub fn encode(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = Graph::new();
        let xv = g.param(x);
        let f = forward_graph(&mut g, self, xv, false)?;
        Ok(g.tensor(f.encoded))
    }
}
