use crate::error::{Error, Result};
use crate::model::ModelWeights;
use crate::scalar::Real;

/// Name prefixes of the independently pruned regions.
pub const REGIONS: [&str; 2] = ["enc.", "dec."];

#[derive(Debug, Clone, PartialEq)]
pub struct RegionStats {
    pub prefix: String,
    pub size: usize,
    pub target_ratio: f64,
    pub pruned: usize,
}

impl RegionStats {
    pub fn achieved_ratio(&self) -> f64 {
        self.pruned as f64 / self.size as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport {
    pub regions: Vec<RegionStats>,
}

impl PruneReport {
    pub fn pruned(&self) -> usize {
        self.regions.iter().map(|r| r.pruned).sum()
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::invalid(format!("pruning ratio must be in [0, 1), got {ratio}")));
    }
    Ok(())
}

/// Keep-mask pruning the `round(ratio * n)` smallest magnitudes; equal
/// magnitudes are pruned in index order.
pub fn magnitude_keep_mask<T: Real>(values: &[T], ratio: f64) -> Result<Vec<bool>> {
    check_ratio(ratio)?;
    let n_prune = (ratio * values.len() as f64).round() as usize;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps enumeration order among ties
    idx.sort_by(|&a, &b| {
        values[a]
            .abs()
            .partial_cmp(&values[b].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut keep = vec![true; values.len()];
    for &i in &idx[..n_prune] {
        keep[i] = false;
    }
    Ok(keep)
}

/// Prune every region of [`REGIONS`] independently at `ratio`, writing the
/// masks into `w` and zeroing pruned entries. Existing masks are replaced.
pub fn prune_by_magnitude<T: Real>(w: &mut ModelWeights<T>, ratio: f64) -> Result<PruneReport> {
    check_ratio(ratio)?;
    let mut regions = Vec::new();
    for prefix in REGIONS {
        let members: Vec<usize> = (0..w.params.len())
            .filter(|&i| w.params[i].name.starts_with(prefix))
            .collect();
        // region values in parameter enumeration order
        let values: Vec<T> = members
            .iter()
            .flat_map(|&i| w.params[i].tensor.data().iter().copied())
            .collect();
        let keep = magnitude_keep_mask(&values, ratio)?;
        let mut off = 0;
        for &i in &members {
            let n = w.params[i].tensor.len();
            w.params[i].mask = Some(keep[off..off + n].to_vec());
            off += n;
        }
        regions.push(RegionStats {
            prefix: prefix.to_string(),
            size: values.len(),
            target_ratio: ratio,
            pruned: keep.iter().filter(|k| !**k).count(),
        });
    }
    w.apply_masks();
    Ok(PruneReport { regions })
}

/// Pruned copy with no retraining.
pub fn prune_without_finetune<T: Real>(w: &ModelWeights<T>, ratio: f64) -> Result<ModelWeights<T>> {
    let mut out = w.clone();
    prune_by_magnitude(&mut out, ratio)?;
    Ok(out)
}
