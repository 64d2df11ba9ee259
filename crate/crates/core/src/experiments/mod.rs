//! Metrics, paired Monte-Carlo sweeps, the streaming adaptation harness and
//! the TOML run configuration.

pub mod config;
mod dynamic;
mod link;
mod metrics;
mod result;
mod sweep;

pub use dynamic::{
    long_delay_profile, resolve_profile, run_dynamic_adaptation, DynamicRecord, DynamicReport, DynamicSpec,
    SegmentSummary, LONG_PROFILE,
};
pub use link::{simulate_link, Estimator, EstimatorKind, GenieSource, LinkContext, LinkDraw};
pub use metrics::{denoising_gain, mse, DenoisingGain, Stats, DG_ERROR_FLOOR};
pub use result::{ExperimentResult, Provenance, ResultRow, CSV_HEADER, CSV_SCHEMA};
pub use sweep::{run_sweep, ExperimentKind, SweepSpec};
