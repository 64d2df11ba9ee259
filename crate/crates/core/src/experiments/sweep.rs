use serde::{Deserialize, Serialize};

use super::link::{simulate_link, Estimator, EstimatorKind, GenieSource, LinkContext};
use super::metrics::{denoising_gain, mse, Stats};
use super::result::{ExperimentResult, Provenance, ResultRow};
use crate::channel::{ChannelSpec, DopplerDraw, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::estimators::bilinear_to_frame;
use crate::model::{attention_probe_run, input_from_ls};
use crate::ofdm::{equalize_and_count_errors, FrameConfig, PilotPattern, SnrSpec};
use crate::pruning::prune_without_finetune;
use crate::rng::mix_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MseVsSnr,
    MseVsDoppler,
    DgVsPruneRatio,
    BerVsSnr,
    DynamicAdaptation,
    AttentionProbe,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::MseVsSnr => "mse_vs_snr",
            ExperimentKind::MseVsDoppler => "mse_vs_doppler",
            ExperimentKind::DgVsPruneRatio => "dg_vs_prune_ratio",
            ExperimentKind::BerVsSnr => "ber_vs_snr",
            ExperimentKind::DynamicAdaptation => "dynamic_adaptation",
            ExperimentKind::AttentionProbe => "attention_probe",
        }
    }

    fn axis_name(&self) -> &'static str {
        match self {
            ExperimentKind::MseVsSnr | ExperimentKind::BerVsSnr => "snr_db",
            ExperimentKind::MseVsDoppler => "max_doppler_hz",
            ExperimentKind::DgVsPruneRatio => "prune_ratio",
            ExperimentKind::DynamicAdaptation => "realization",
            ExperimentKind::AttentionProbe => "element",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: ExperimentKind,
    /// for the attention probe: head-output rows to report, empty for all
    pub axis: Vec<f64>,
    pub realizations: usize,
    pub profile: PowerDelayProfile,
    /// SNR when the axis is not SNR
    pub snr_db: f64,
    /// maximum Doppler (drawn uniformly below it per realization) when the axis is not Doppler
    pub doppler_hz: f64,
    /// SNRs visited round-robin by the DG sweep
    pub dg_snrs_db: Vec<f64>,
    pub estimators: Vec<Estimator>,
    /// already pruned and fine-tuned networks for the DG sweep, keyed by ratio
    pub finetuned: Vec<(f64, Estimator)>,
    pub genie: GenieSource,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::invalid("sweep needs at least one realization per point"));
        }
        let empty_ok = self.kind == ExperimentKind::AttentionProbe;
        if (self.axis.is_empty() && !empty_ok) || self.axis.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sweep axis must be non-empty and finite"));
        }
        if self.estimators.is_empty() && self.finetuned.is_empty() {
            return Err(Error::invalid("sweep has no estimators"));
        }
        if self.kind == ExperimentKind::DgVsPruneRatio && self.dg_snrs_db.is_empty() {
            return Err(Error::invalid("DG sweep needs at least one SNR"));
        }
        if self.kind == ExperimentKind::DynamicAdaptation {
            return Err(Error::invalid("dynamic adaptation runs through run_dynamic_adaptation"));
        }
        Ok(())
    }

    fn channel(&self, max_doppler: f64) -> ChannelSpec {
        ChannelSpec::new(
            self.profile.clone(),
            DopplerDraw::Uniform {
                lo: 0.0,
                hi: max_doppler,
            },
        )
    }
}

fn snr_spec(db: f64) -> SnrSpec {
    if db.is_finite() {
        SnrSpec::db(db)
    } else {
        SnrSpec::noiseless()
    }
}

/// Seed of realization `r` at axis point `p`; shared by every estimator.
fn draw_seed(seed: u64, p: usize, r: usize) -> u64 {
    mix_seed(mix_seed(seed, p as u64), r as u64)
}

fn rows_from(axis: f64, metric: &str, names: &[String], stats: &[Stats]) -> Vec<ResultRow> {
    names
        .iter()
        .zip(stats)
        .map(|(n, s)| ResultRow {
            axis,
            estimator: n.clone(),
            metric: metric.to_string(),
            mean: s.mean(),
            std_err: s.std_err(),
            n: s.n,
        })
        .collect()
}

/// Run one sweep; every estimator sees the same channel and noise draws.
pub fn run_sweep(spec: &SweepSpec, provenance: Provenance) -> Result<ExperimentResult> {
    spec.validate()?;
    let frame = FrameConfig::default();
    let pattern = PilotPattern::single(&frame)?;
    let names: Vec<String> = spec.estimators.iter().map(|e| e.name.clone()).collect();
    let mut rows = Vec::new();
    match spec.kind {
        ExperimentKind::MseVsSnr | ExperimentKind::BerVsSnr | ExperimentKind::MseVsDoppler => {
            let needs_genie = spec
                .estimators
                .iter()
                .any(|e| matches!(e.kind, EstimatorKind::Mmse1d | EstimatorKind::Mmse2d));
            let fixed_channel = spec.channel(spec.doppler_hz);
            let fixed_corr = match (needs_genie, spec.kind) {
                (true, ExperimentKind::MseVsDoppler) | (false, _) => None,
                (true, _) => Some(spec.genie.correlations(&fixed_channel, frame.n_symbols)?),
            };
            for (p, &axis) in spec.axis.iter().enumerate() {
                let (channel, snr_db) = match spec.kind {
                    ExperimentKind::MseVsDoppler => (spec.channel(axis), spec.snr_db),
                    _ => (fixed_channel.clone(), axis),
                };
                let corr = match (&fixed_corr, needs_genie) {
                    (Some(c), _) => Some(c.clone()),
                    (None, true) => Some(spec.genie.correlations(&channel, frame.n_symbols)?),
                    (None, false) => None,
                };
                let snr = snr_spec(snr_db);
                let ctx = LinkContext::new(&pattern, snr, corr.as_ref(), &spec.estimators)?;
                let mut stats = vec![Stats::default(); spec.estimators.len()];
                for r in 0..spec.realizations {
                    let d = simulate_link(&channel, &pattern, snr, draw_seed(spec.seed, p, r))?;
                    for (e, st) in spec.estimators.iter().zip(&mut stats) {
                        let h_hat = ctx.estimate(e, &d)?;
                        let v = if spec.kind == ExperimentKind::BerVsSnr {
                            equalize_and_count_errors(&d.y, &h_hat, &d.payload, &pattern)?.ber()
                        } else {
                            mse(&h_hat, &d.h)?
                        };
                        st.push(v);
                    }
                }
                let metric = if spec.kind == ExperimentKind::BerVsSnr {
                    "ber"
                } else {
                    "mse"
                };
                rows.extend(rows_from(axis, metric, &names, &stats));
            }
        }
        ExperimentKind::DgVsPruneRatio => {
            let channel = spec.channel(spec.doppler_hz);
            let contexts = spec
                .dg_snrs_db
                .iter()
                .map(|&s| LinkContext::new(&pattern, snr_spec(s), None, &[]))
                .collect::<Result<Vec<_>>>()?;
            for (p, &ratio) in spec.axis.iter().enumerate() {
                let mut ests = Vec::new();
                for e in &spec.estimators {
                    let model = e
                        .model
                        .as_ref()
                        .ok_or_else(|| Error::invalid("DG sweep estimators must be networks"))?;
                    let name = if ratio == 0.0 {
                        e.name.clone()
                    } else {
                        format!("{}-nofinetune", e.name)
                    };
                    ests.push(Estimator::network(name, prune_without_finetune(model, ratio)?));
                }
                ests.extend(
                    spec.finetuned
                        .iter()
                        .filter(|(r, _)| *r == ratio)
                        .map(|(_, e)| e.clone()),
                );
                let mut stats = vec![Stats::default(); ests.len()];
                for r in 0..spec.realizations {
                    let k = r % contexts.len();
                    let ctx = &contexts[k];
                    let d = simulate_link(&channel, &pattern, ctx.snr, draw_seed(spec.seed, p, r))?;
                    let ls = bilinear_to_frame(&d.ls, &pattern)?;
                    for (e, st) in ests.iter().zip(&mut stats) {
                        st.push(denoising_gain(&ls, &ctx.estimate(e, &d)?, &d.h)?.db);
                    }
                }
                let est_names: Vec<String> = ests.iter().map(|e| e.name.clone()).collect();
                rows.extend(rows_from(ratio, "dg_db", &est_names, &stats));
            }
        }
        ExperimentKind::AttentionProbe => {
            let channel = spec.channel(spec.doppler_hz);
            let snr = snr_spec(spec.snr_db);
            for e in &spec.estimators {
                let model = e
                    .model
                    .as_ref()
                    .ok_or_else(|| Error::invalid("attention probe needs a network"))?;
                let inputs = (0..spec.realizations)
                    .map(|r| {
                        simulate_link(&channel, &pattern, snr, draw_seed(spec.seed, 0, r)).map(|d| input_from_ls(&d.ls))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let probe = attention_probe_run(model, &inputs)?;
                for (h, m) in probe.mean_abs_output.iter().enumerate() {
                    let all: Vec<f64> = (0..m.shape()[0]).map(|i| i as f64).collect();
                    let axis_values = if spec.axis.is_empty() { &all } else { &spec.axis };
                    for (c, part) in ["re", "im"].iter().enumerate() {
                        for &axis in axis_values {
                            let i = axis as usize;
                            if i >= m.shape()[0] {
                                return Err(Error::invalid(format!("probe element {i} out of range")));
                            }
                            rows.push(ResultRow {
                                axis,
                                estimator: format!("{}.head{h}.{part}", e.name),
                                metric: "mean_abs_attention".into(),
                                mean: m.at(&[i, c]),
                                std_err: f64::NAN,
                                n: spec.realizations,
                            });
                        }
                    }
                }
            }
        }
        ExperimentKind::DynamicAdaptation => unreachable!("rejected by validate"),
    }
    Ok(ExperimentResult {
        kind: spec.kind.as_str().into(),
        axis_name: spec.kind.axis_name().into(),
        rows,
        provenance,
    })
}
