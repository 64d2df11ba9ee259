#![allow(dead_code)]

use channelformer::nn::{Graph, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(shape: &[usize], scale: f64, rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

/// Relative mismatch between an analytic and a numeric derivative.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-7 {
        // both effectively zero; judge on absolute difference
        diff / 1e-7
    } else {
        diff / scale
    }
}

/// Central finite-difference check of `f` against reverse-mode gradients.
///
/// `f` receives a graph plus one var per input tensor and returns a scalar var.
/// Checks every element unless `max_per_tensor` limits it to an evenly strided subset.
/// Returns the worst relative error seen.
pub fn grad_check<F>(inputs: &[Tensor<f64>], max_per_tensor: Option<usize>, f: F) -> f64
where
    F: for<'a> Fn(&mut Graph<'a, f64>, &[Var]) -> Var,
{
    let h = 1e-5;
    let eval = |ts: &[Tensor<f64>]| -> f64 {
        let mut g = Graph::new();
        let vars: Vec<Var> = ts.iter().map(|t| g.param(t)).collect();
        let out = f(&mut g, &vars);
        g.scalar(out)
    };
    let tracked: Vec<Tensor<f64>> = inputs.iter().cloned().map(|t| t.with_grad()).collect();
    let mut g = Graph::new();
    let vars: Vec<Var> = tracked.iter().map(|t| g.param(t)).collect();
    let out = f(&mut g, &vars);
    let grads = g.backward(out).unwrap();
    let analytic: Vec<Vec<f64>> = vars
        .iter()
        .zip(&tracked)
        .map(|(v, t)| grads.get_or_zero(*v, t.len()))
        .collect();
    drop(g);

    let mut worst = 0.0_f64;
    let mut work = inputs.to_vec();
    for ti in 0..inputs.len() {
        let n = inputs[ti].len();
        let stride = match max_per_tensor {
            Some(m) if n > m => n.div_ceil(m),
            _ => 1,
        };
        for j in (0..n).step_by(stride) {
            let orig = work[ti].data()[j];
            work[ti].data_mut()[j] = orig + h;
            let up = eval(&work);
            work[ti].data_mut()[j] = orig - h;
            let down = eval(&work);
            work[ti].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let e = rel_err(analytic[ti][j], numeric);
            if e > worst {
                worst = e;
            }
        }
    }
    worst
}

/// Relative error of `analytic` against a central difference `numeric(h)`.
/// Retries with a smaller step when the first one straddles a kink
/// (ReLU / Huber switch points), which a 1e-5 step occasionally does.
pub fn fd_check_entry(analytic: f64, mut numeric: impl FnMut(f64) -> f64) -> f64 {
    let e = rel_err(analytic, numeric(1e-5));
    if e < 1e-4 {
        return e;
    }
    e.min(rel_err(analytic, numeric(1e-6)))
}
