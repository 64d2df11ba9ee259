use rand::Rng;

use super::metrics::{mse, Stats};
use super::result::{ExperimentResult, Provenance, ResultRow};
use crate::channel::{standard_pdp, ChannelSpec, DopplerDraw, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::estimators::{bilinear_to_frame, ls_estimate};
use crate::model::ModelWeights;
use crate::ofdm::{
    apply_channel, build_slot, extract_pilot_ls_input, random_payload, FrameConfig, PilotPattern, SnrSpec,
};
use crate::rng::{mix_seed, rng_for, streams};
use crate::training::{
    online_sample_from_received, Hyperparams, LabelDesign, OnlineLabeler, OnlineSample, OnlineTrainer,
};

/// Name of the long-delay-spread profile that stands in for the
/// geometry-based channel of the last segment.
pub const LONG_PROFILE: &str = "LONG";

/// Eight taps out to 14 us, just inside the 16-sample cyclic prefix.
pub fn long_delay_profile() -> Result<PowerDelayProfile> {
    PowerDelayProfile::new(
        LONG_PROFILE,
        vec![0.0, 500.0, 1500.0, 3000.0, 5000.0, 8000.0, 11000.0, 14000.0],
        vec![0.0, -2.0, -3.0, -4.0, -6.0, -8.0, -10.0, -12.0],
    )
}

/// A built-in profile or [`LONG_PROFILE`].
pub fn resolve_profile(name: &str) -> Result<PowerDelayProfile> {
    if name.eq_ignore_ascii_case(LONG_PROFILE) {
        long_delay_profile()
    } else {
        standard_pdp(name)
    }
}

#[derive(Debug, Clone)]
pub struct DynamicSpec {
    /// (profile, realizations) in the order they are visited
    pub segments: Vec<(PowerDelayProfile, usize)>,
    pub snr_range_db: (f64, f64),
    pub doppler_range_hz: (f64, f64),
    pub boost_db: f64,
    pub label: LabelDesign,
    /// samples per online step; the window slides by one realization
    pub window: usize,
    /// realizations per averaged output row
    pub block: usize,
    /// trailing realizations of a segment that count as settled
    pub settle: usize,
    pub hp: Hyperparams,
    pub seed: u64,
}

impl DynamicSpec {
    /// ETU, CUSTOM, EVA, LONG with `per_segment` realizations each.
    pub fn standard(per_segment: usize, seed: u64) -> Result<Self> {
        let segments = ["ETU", "CUSTOM", "EVA", LONG_PROFILE]
            .iter()
            .map(|n| resolve_profile(n).map(|p| (p, per_segment)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DynamicSpec {
            segments,
            snr_range_db: (15.0, 25.0),
            doppler_range_hz: (0.0, 97.0),
            boost_db: 5.0,
            label: LabelDesign::Mmse,
            window: 3,
            block: 50,
            settle: 500.min(per_segment),
            hp: Hyperparams::streaming(),
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() || self.segments.iter().any(|(_, n)| *n == 0) {
            return Err(Error::invalid("dynamic run needs non-empty segments"));
        }
        if self.window == 0 || self.block == 0 {
            return Err(Error::invalid("window and block must be positive"));
        }
        if self.segments.iter().any(|(_, n)| self.settle > *n) || self.settle == 0 {
            return Err(Error::invalid("settle window must fit inside every segment"));
        }
        let (lo, hi) = self.snr_range_db;
        if !(lo.is_finite() && hi >= lo) {
            return Err(Error::invalid("bad SNR range"));
        }
        DopplerDraw::Uniform {
            lo: self.doppler_range_hz.0,
            hi: self.doppler_range_hz.1,
        }
        .validate()?;
        self.hp.validate()
    }
}

/// Per-realization outcome for one tracked model.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicRecord {
    pub index: usize,
    pub segment: usize,
    pub snr_db: f64,
    pub mse_ls: f64,
    /// (adapting, frozen) per model, in input order
    pub mse: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSummary {
    pub profile: String,
    /// mean over the trailing `settle` realizations
    pub settled_adapt: Vec<Stats>,
    /// mean over the whole segment
    pub frozen: Vec<Stats>,
    pub settled_frozen: Vec<Stats>,
    pub ls: Stats,
}

#[derive(Debug, Clone)]
pub struct DynamicReport {
    pub model_names: Vec<String>,
    pub records: Vec<DynamicRecord>,
    pub segments: Vec<SegmentSummary>,
    pub adapted: Vec<ModelWeights<f64>>,
    block: usize,
}

impl DynamicReport {
    pub fn segment(&self, profile: &str) -> Option<&SegmentSummary> {
        self.segments.iter().find(|s| s.profile.eq_ignore_ascii_case(profile))
    }

    /// Block-averaged MSE; axis is the first realization of the block.
    pub fn to_result(&self, provenance: Provenance) -> ExperimentResult {
        let mut rows = Vec::new();
        for chunk in self.records.chunks(self.block) {
            let axis = chunk[0].index as f64;
            let mut push = |name: String, s: Stats| {
                rows.push(ResultRow {
                    axis,
                    estimator: name,
                    metric: "mse".into(),
                    mean: s.mean(),
                    std_err: s.std_err(),
                    n: s.n,
                })
            };
            push("ls".into(), chunk.iter().map(|r| r.mse_ls).collect());
            for (m, name) in self.model_names.iter().enumerate() {
                push(format!("{name}-online"), chunk.iter().map(|r| r.mse[m].0).collect());
                push(format!("{name}-frozen"), chunk.iter().map(|r| r.mse[m].1).collect());
            }
        }
        ExperimentResult {
            kind: "dynamic_adaptation".into(),
            axis_name: "realization".into(),
            rows,
            provenance,
        }
    }
}

/// Stream realizations through each segment. Every model is scored on a slot
/// before that slot's sample joins its training window, so the recorded MSE
/// is always on data the model has not yet seen.
pub fn run_dynamic_adaptation(models: &[(String, ModelWeights<f64>)], spec: &DynamicSpec) -> Result<DynamicReport> {
    spec.validate()?;
    if models.is_empty() {
        return Err(Error::invalid("dynamic run needs at least one model"));
    }
    let frame = FrameConfig::default();
    let pattern = PilotPattern::double(&frame, spec.boost_db)?;
    let mut trainers = models
        .iter()
        .map(|(_, w)| OnlineTrainer::new(w.clone(), spec.hp.clone(), spec.window))
        .collect::<Result<Vec<_>>>()?;
    let mut labeler = OnlineLabeler::new(spec.label);
    let mut window: Vec<OnlineSample> = Vec::with_capacity(spec.window);
    let mut records = Vec::new();
    let mut segments = Vec::new();
    let doppler = DopplerDraw::Uniform {
        lo: spec.doppler_range_hz.0,
        hi: spec.doppler_range_hz.1,
    };
    let mut index = 0usize;
    for (s, (profile, n)) in spec.segments.iter().enumerate() {
        let channel = ChannelSpec::new(profile.clone(), doppler);
        let start = records.len();
        for _ in 0..*n {
            let mut rng = rng_for(mix_seed(spec.seed, index as u64), streams::SWEEP);
            let snr_db = rng.random_range(spec.snr_range_db.0..=spec.snr_range_db.1);
            let snr = SnrSpec::db(snr_db);
            let real = channel.draw(frame.n_symbols, &frame.numerology, &mut rng)?;
            let x = build_slot(&random_payload(&pattern, &mut rng), &pattern)?;
            let y = apply_channel(&x, &real.h, snr, &mut rng)?;
            let (yp, xp) = extract_pilot_ls_input(&y.grid, &pattern)?;
            let ls = ls_estimate(&yp, &xp)?;
            let mse_ls = mse(&bilinear_to_frame(&ls, &pattern)?, &real.h)?;
            let mut per_model = Vec::with_capacity(models.len());
            for (t, (_, frozen)) in trainers.iter().zip(models) {
                let a = mse(&t.weights.estimate_frame(&ls, &frame)?, &real.h)?;
                let f = mse(&frozen.estimate_frame(&ls, &frame)?, &real.h)?;
                per_model.push((a, f));
            }
            records.push(DynamicRecord {
                index,
                segment: s,
                snr_db,
                mse_ls,
                mse: per_model,
            });

            if window.len() == spec.window {
                window.remove(0);
            }
            window.push(online_sample_from_received(
                &y.grid,
                &pattern,
                &mut labeler,
                snr,
                index as u64,
            )?);
            if window.len() == spec.window {
                for t in &mut trainers {
                    t.step(&window)?;
                }
            }
            index += 1;
        }
        let seg = &records[start..];
        let tail = &seg[seg.len() - spec.settle..];
        let per = |sel: &[DynamicRecord], f: &dyn Fn(&(f64, f64)) -> f64| -> Vec<Stats> {
            (0..models.len())
                .map(|m| sel.iter().map(|r| f(&r.mse[m])).collect())
                .collect()
        };
        segments.push(SegmentSummary {
            profile: profile.name().to_string(),
            settled_adapt: per(tail, &|p| p.0),
            frozen: per(seg, &|p| p.1),
            settled_frozen: per(tail, &|p| p.1),
            ls: seg.iter().map(|r| r.mse_ls).collect(),
        });
    }
    Ok(DynamicReport {
        model_names: models.iter().map(|(n, _)| n.clone()).collect(),
        records,
        segments,
        adapted: trainers.into_iter().map(|t| t.weights).collect(),
        block: spec.block,
    })
}
