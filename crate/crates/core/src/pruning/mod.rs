//! Region-wise magnitude pruning, masked fine-tuning and gradient-based
//! reactivation of pruned parameters.

mod finetune;
mod magnitude;

pub use finetune::{fine_tune, reactivation_check, FineTuneReport, Reactivation};
pub use magnitude::{
    magnitude_keep_mask, prune_by_magnitude, prune_without_finetune, PruneReport, RegionStats, REGIONS,
};
