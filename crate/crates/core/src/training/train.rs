use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;

use super::{Dataset, Hyperparams, TrainingSample};
use crate::error::{Error, Result};
use crate::model::{forward_graph, ModelWeights};
use crate::nn::{AdamState, Graph, LossSpec, Tensor, Var};
use crate::rng::{rng_for, streams};

fn loss_node(g: &mut Graph<'_, f64>, pred: Var, target: Var, loss: LossSpec) -> Result<Var> {
    match loss {
        LossSpec::Huber { delta } => g.huber_loss(pred, target, delta),
        LossSpec::Mse => g.mse_loss(pred, target),
    }
}

/// Loss of one sample and its gradient for every parameter (raw, unmasked).
pub fn sample_gradients(
    w: &ModelWeights<f64>,
    x: &Tensor<f64>,
    y: &Tensor<f64>,
    loss: LossSpec,
) -> Result<(f64, Vec<Vec<f64>>)> {
    let mut g = Graph::new();
    let xv = g.param(x);
    let yv = g.param(y);
    let f = forward_graph(&mut g, w, xv, true)?;
    let l = loss_node(&mut g, f.output, yv, loss)?;
    let value = g.scalar(l);
    let mut grads = g.backward(l)?;
    let out = f
        .params
        .iter()
        .zip(&w.params)
        .map(|(v, p)| grads.take(*v).unwrap_or_else(|| vec![0.0; p.tensor.len()]))
        .collect();
    Ok((value, out))
}

/// Mean loss and mean gradient over a batch of `(feature, label)` pairs.
pub fn batch_gradients(
    w: &ModelWeights<f64>,
    batch: &[(&Tensor<f64>, &Tensor<f64>)],
    loss: LossSpec,
) -> Result<(f64, Vec<Vec<f64>>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut acc: Vec<Vec<f64>> = w.sizes().iter().map(|&n| vec![0.0; n]).collect();
    let mut total = 0.0;
    for (x, y) in batch {
        let (l, g) = sample_gradients(w, x, y, loss)?;
        total += l;
        for (a, gi) in acc.iter_mut().zip(&g) {
            for (s, v) in a.iter_mut().zip(gi) {
                *s += v;
            }
        }
    }
    let n = batch.len() as f64;
    for a in &mut acc {
        for s in a.iter_mut() {
            *s /= n;
        }
    }
    Ok((total / n, acc))
}

/// Mean per-sample loss without recording gradients.
pub fn evaluate_loss(w: &ModelWeights<f64>, samples: &[TrainingSample], loss: LossSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples to evaluate"));
    }
    let mut total = 0.0;
    for s in samples {
        let p = w.predict(&s.feature)?;
        total += match loss {
            LossSpec::Huber { delta } => crate::nn::loss::huber_loss(p.data(), s.label.data(), delta)?,
            LossSpec::Mse => crate::nn::loss::mse_loss(p.data(), s.label.data())?,
        };
    }
    Ok(total / samples.len() as f64)
}

/// One pass over `samples` in `order`; `observe` sees every raw batch
/// gradient before the update. Returns the mean pre-update loss.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_epoch(
    w: &mut ModelWeights<f64>,
    samples: &[TrainingSample],
    order: &[usize],
    hp: &Hyperparams,
    adam: &mut AdamState<f64>,
    masks: Option<&[Option<Vec<bool>>]>,
    epoch: usize,
    observe: &mut dyn FnMut(&[Vec<f64>]),
) -> Result<f64> {
    let mut total = 0.0;
    for chunk in order.chunks(hp.batch_size) {
        let batch: Vec<_> = chunk
            .iter()
            .map(|&i| (&samples[i].feature, &samples[i].label))
            .collect();
        let (l, grads) = batch_gradients(w, &batch, hp.loss)?;
        if !l.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        total += l * chunk.len() as f64;
        observe(&grads);
        let mut params: Vec<&mut [f64]> = w.params.iter_mut().map(|p| p.tensor.data_mut()).collect();
        adam.step(&mut params, &grads, masks)?;
    }
    Ok(total / order.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    /// NaN when the dataset has no validation split
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub curve: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_loss: f64,
    /// validation (or training) loss of the weights passed in
    pub initial_loss: f64,
}

/// Mini-batch Adam on `data.train`. On return `w` holds the weights of the
/// epoch with the lowest validation loss (training loss if there is no
/// validation split). Existing prune masks are honoured.
pub fn train(
    w: &mut ModelWeights<f64>,
    data: &Dataset,
    hp: &Hyperparams,
    seed: u64,
    mut progress: impl FnMut(&EpochStats),
) -> Result<TrainReport> {
    hp.validate()?;
    if data.train.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if data.mode != w.config.mode {
        return Err(Error::invalid(format!(
            "dataset is for the {} model, weights are {}",
            data.mode.as_str(),
            w.config.mode.as_str()
        )));
    }
    let select = |w: &ModelWeights<f64>| -> Result<f64> {
        if data.val.is_empty() {
            evaluate_loss(w, &data.train, hp.loss)
        } else {
            evaluate_loss(w, &data.val, hp.loss)
        }
    };
    let initial_loss = select(w)?;
    let masks = w.masks();
    let masked = w.has_masks();
    let mut adam = AdamState::new(&w.sizes(), hp.initial_lr, hp.l2);
    let mut rng = rng_for(seed, streams::SHUFFLE);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut best = (0, initial_loss, w.clone());
    let mut curve = Vec::with_capacity(hp.max_epochs);
    for epoch in 1..=hp.max_epochs {
        adam.lr = hp.lr_at(epoch);
        order.shuffle(&mut rng);
        let mask_ref = masked.then_some(masks.as_slice());
        let train_loss = run_epoch(w, &data.train, &order, hp, &mut adam, mask_ref, epoch, &mut |_| {})?;
        let val_loss = if data.val.is_empty() {
            f64::NAN
        } else {
            evaluate_loss(w, &data.val, hp.loss)?
        };
        let score = if data.val.is_empty() {
            evaluate_loss(w, &data.train, hp.loss)?
        } else {
            val_loss
        };
        if !score.is_finite() || !w.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        let stats = EpochStats {
            epoch,
            train_loss,
            val_loss,
            lr: adam.lr,
        };
        progress(&stats);
        curve.push(stats);
        if score < best.1 {
            best = (epoch, score, w.clone());
        }
    }
    let (best_epoch, best_loss, weights) = best;
    *w = weights;
    Ok(TrainReport {
        curve,
        best_epoch,
        best_loss,
        initial_loss,
    })
}

/// CSV with header `epoch,train_loss,val_loss,lr`.
pub fn write_loss_curve(path: &Path, curve: &[EpochStats]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "epoch,train_loss,val_loss,lr").unwrap();
    for s in curve {
        writeln!(out, "{},{:.9e},{:.9e},{:.6e}", s.epoch, s.train_loss, s.val_loss, s.lr).unwrap();
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
