use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::model::ModelWeights;
use crate::nn::AdamState;
use crate::rng::{rng_for, streams};
use crate::training::{evaluate_loss, run_epoch, Dataset, EpochStats, Hyperparams};

#[derive(Debug, Clone, PartialEq)]
pub struct Reactivation {
    pub param: String,
    pub index: usize,
    pub mean_abs_grad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneReport {
    pub curve: Vec<EpochStats>,
    pub pruned_before: usize,
    /// `factor * median` over kept parameters in the last epoch
    pub threshold: f64,
    pub reactivated: Vec<Reactivation>,
}

/// Unmask pruned entries whose mean |gradient| exceeds `factor` times the
/// median mean |gradient| of the kept entries. Returns `(param, index)` of
/// every reactivated entry.
pub fn reactivation_check(
    mean_abs_grad: &[Vec<f64>],
    masks: &mut [Option<Vec<bool>>],
    factor: f64,
) -> Result<(f64, Vec<(usize, usize)>)> {
    if mean_abs_grad.len() != masks.len() {
        return Err(Error::shape(
            "reactivation_check",
            &[mean_abs_grad.len()],
            &[masks.len()],
        ));
    }
    let mut kept = Vec::new();
    for (g, m) in mean_abs_grad.iter().zip(masks.iter()) {
        match m {
            Some(m) if m.len() != g.len() => return Err(Error::shape("reactivation_check", &[m.len()], &[g.len()])),
            Some(m) => kept.extend(g.iter().zip(m).filter(|(_, k)| **k).map(|(v, _)| *v)),
            None => kept.extend_from_slice(g),
        }
    }
    if kept.is_empty() {
        return Ok((f64::INFINITY, Vec::new()));
    }
    kept.sort_by(f64::total_cmp);
    let n = kept.len();
    let median = if n % 2 == 1 {
        kept[n / 2]
    } else {
        0.5 * (kept[n / 2 - 1] + kept[n / 2])
    };
    let threshold = factor * median;
    let mut out = Vec::new();
    for (i, (g, m)) in mean_abs_grad.iter().zip(masks.iter_mut()).enumerate() {
        let Some(m) = m else { continue };
        for (j, (v, k)) in g.iter().zip(m.iter_mut()).enumerate() {
            if !*k && *v > threshold {
                *k = true;
                out.push((i, j));
            }
        }
    }
    Ok((threshold, out))
}

/// Masked fine-tuning. Gradients are computed for every parameter, pruned
/// ones receive no update, and after the last epoch pruned entries with a
/// persistently large gradient are reactivated (unmasked, still 0).
pub fn fine_tune(
    w: &mut ModelWeights<f64>,
    data: &Dataset,
    hp: &Hyperparams,
    factor: f64,
    seed: u64,
    mut progress: impl FnMut(&EpochStats),
) -> Result<FineTuneReport> {
    hp.validate()?;
    if data.train.is_empty() {
        return Err(Error::invalid("fine-tuning set is empty"));
    }
    if data.mode != w.config.mode {
        return Err(Error::invalid("fine-tuning dataset does not match the model mode"));
    }
    for p in &w.params {
        if p.mask.as_ref().is_some_and(|m| m.len() != p.tensor.len()) {
            return Err(Error::invalid(format!("mask of {} does not match its tensor", p.name)));
        }
    }
    let mut masks = w.masks();
    let masked = w.has_masks();
    let pruned_before = w.count_parameters() - w.count_kept();
    w.apply_masks();

    let mut adam = AdamState::new(&w.sizes(), hp.initial_lr, hp.l2);
    let mut rng = rng_for(seed, streams::SHUFFLE);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut sums: Vec<Vec<f64>> = w.sizes().iter().map(|&n| vec![0.0; n]).collect();
    let mut batches = 0usize;
    let mut curve = Vec::new();
    for epoch in 1..=hp.max_epochs {
        adam.lr = hp.lr_at(epoch);
        order.shuffle(&mut rng);
        let last = epoch == hp.max_epochs;
        let mut observe = |g: &[Vec<f64>]| {
            if last {
                batches += 1;
                for (s, gi) in sums.iter_mut().zip(g) {
                    for (a, v) in s.iter_mut().zip(gi) {
                        *a += v.abs();
                    }
                }
            }
        };
        let mask_ref = masked.then_some(masks.as_slice());
        let train_loss = run_epoch(w, &data.train, &order, hp, &mut adam, mask_ref, epoch, &mut observe)?;
        let val_loss = if data.val.is_empty() {
            f64::NAN
        } else {
            evaluate_loss(w, &data.val, hp.loss)?
        };
        let stats = EpochStats {
            epoch,
            train_loss,
            val_loss,
            lr: adam.lr,
        };
        progress(&stats);
        curve.push(stats);
    }
    for s in &mut sums {
        for a in s.iter_mut() {
            *a /= batches.max(1) as f64;
        }
    }
    let (threshold, hits) = reactivation_check(&sums, &mut masks, factor)?;
    let reactivated = hits
        .iter()
        .map(|&(i, j)| Reactivation {
            param: w.params[i].name.clone(),
            index: j,
            mean_abs_grad: sums[i][j],
        })
        .collect();
    if masked {
        for (p, m) in w.params.iter_mut().zip(masks) {
            p.mask = m;
        }
    }
    Ok(FineTuneReport {
        curve,
        pruned_before,
        threshold,
        reactivated,
    })
}
