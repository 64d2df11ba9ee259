//! TOML run configuration shared by every CLI subcommand.
//!
//! Relative paths inside a config resolve against the directory holding the
//! config file. Every section is optional; a subcommand fails if the section it
//! needs is absent. See `docs/config.md` for the full schema.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::dynamic::{resolve_profile, DynamicSpec};
use super::link::{Estimator, GenieSource};
use super::sweep::{ExperimentKind, SweepSpec};
use crate::channel::{ChannelSpec, DopplerDraw, PowerDelayProfile, ProfileDef};
use crate::error::{Error, Result};
use crate::model::Mode;
use crate::nn::LossSpec;
use crate::training::{DatasetSpec, Hyperparams, LabelDesign};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub profile: Vec<ProfileDef>,
    pub dataset: Option<DatasetSection>,
    pub train: Option<TrainSection>,
    pub prune: Option<PruneSection>,
    pub finetune: Option<FineTuneSection>,
    pub sweep: Option<SweepSection>,
    pub online: Option<OnlineSection>,
    pub probe: Option<ProbeSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub mode: Mode,
    pub profile: String,
    pub doppler_hz: [f64; 2],
    pub snr_db: [f64; 2],
    pub n_samples: usize,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "yes")]
    pub noise: bool,
}

/// Optional overrides on top of the per-mode defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverrides {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub lr_drop_period: Option<usize>,
    pub lr_drop_factor: Option<f64>,
    pub batch_size: Option<usize>,
    pub l2: Option<f64>,
    pub loss: Option<LossSpec>,
}

impl ScheduleOverrides {
    /// `epochs` rescales the drop period unless it is given explicitly.
    pub fn apply(&self, base: Hyperparams) -> Result<Hyperparams> {
        let mut hp = match self.epochs {
            Some(e) => base.with_epochs(e),
            None => base,
        };
        if let Some(v) = self.lr {
            hp.initial_lr = v;
        }
        if let Some(v) = self.lr_drop_period {
            hp.lr_drop_period = v;
        }
        if let Some(v) = self.lr_drop_factor {
            hp.lr_drop_factor = v;
        }
        if let Some(v) = self.batch_size {
            hp.batch_size = v;
        }
        if let Some(v) = self.l2 {
            hp.l2 = v;
        }
        if let Some(v) = self.loss {
            hp.loss = v;
        }
        hp.validate()?;
        Ok(hp)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub mode: Mode,
    /// dataset file; when absent the `[dataset]` section is generated in memory
    pub dataset: Option<PathBuf>,
    #[serde(flatten)]
    pub schedule: ScheduleOverrides,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneSection {
    pub weights: PathBuf,
    pub ratio: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FineTuneSection {
    pub weights: PathBuf,
    pub dataset: Option<PathBuf>,
    #[serde(default = "default_reactivation")]
    pub reactivation_factor: f64,
    #[serde(flatten)]
    pub schedule: ScheduleOverrides,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkEntry {
    pub name: String,
    pub weights: PathBuf,
    /// marks an already pruned and fine-tuned model for the DG sweep
    pub prune_ratio: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub kind: ExperimentKind,
    pub axis: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    #[serde(default = "default_doppler")]
    pub doppler_hz: f64,
    #[serde(default = "default_dg_snrs")]
    pub dg_snrs_db: Vec<f64>,
    #[serde(default)]
    pub estimators: Vec<String>,
    #[serde(default)]
    pub network: Vec<NetworkEntry>,
    #[serde(default = "default_genie")]
    pub genie_realizations: usize,
    pub genie_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineModelEntry {
    pub name: String,
    pub weights: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineSection {
    #[serde(default = "default_segments")]
    pub segments: Vec<String>,
    #[serde(default = "default_segment_len")]
    pub segment_realizations: usize,
    #[serde(default = "default_online_snr")]
    pub snr_db: [f64; 2],
    #[serde(default = "default_online_doppler")]
    pub doppler_hz: [f64; 2],
    #[serde(default = "default_boost")]
    pub boost_db: f64,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_block")]
    pub block: usize,
    #[serde(default = "default_settle")]
    pub settle: usize,
    pub lr: Option<f64>,
    pub model: Vec<OnlineModelEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub weights: PathBuf,
    #[serde(default = "default_probe_realizations")]
    pub realizations: usize,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default = "default_snr")]
    pub snr_db: f64,
    #[serde(default = "default_doppler")]
    pub doppler_hz: f64,
}

fn yes() -> bool {
    true
}
fn default_val_fraction() -> f64 {
    0.05
}
fn default_reactivation() -> f64 {
    10.0
}
fn default_realizations() -> usize {
    1000
}
fn default_probe_realizations() -> usize {
    200
}
fn default_profile() -> String {
    "ETU".into()
}
fn default_snr() -> f64 {
    10.0
}
fn default_doppler() -> f64 {
    97.0
}
fn default_dg_snrs() -> Vec<f64> {
    vec![5.0, 10.0, 15.0, 20.0, 25.0]
}
fn default_genie() -> usize {
    4000
}
fn default_segments() -> Vec<String> {
    ["ETU", "CUSTOM", "EVA", "LONG"].iter().map(|s| s.to_string()).collect()
}
fn default_segment_len() -> usize {
    2000
}
fn default_online_snr() -> [f64; 2] {
    [15.0, 25.0]
}
fn default_online_doppler() -> [f64; 2] {
    [0.0, 97.0]
}
fn default_boost() -> f64 {
    5.0
}
fn default_label() -> String {
    "mmse".into()
}
fn default_window() -> usize {
    3
}
fn default_block() -> usize {
    50
}
fn default_settle() -> usize {
    500
}

fn require<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| Error::Config(format!("missing [{name}] section")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().replace('\n', " ")))?;
        for p in &cfg.profile {
            p.build()?;
        }
        Ok(cfg)
    }

    /// Config-defined profiles shadow the built-in names.
    pub fn profile(&self, name: &str) -> Result<PowerDelayProfile> {
        match self.profile.iter().find(|p| p.name.eq_ignore_ascii_case(name)) {
            Some(p) => p.build(),
            None => resolve_profile(name),
        }
    }

    pub fn dataset_spec(&self, seed: u64) -> Result<DatasetSpec> {
        let d = require(&self.dataset, "dataset")?;
        let spec = DatasetSpec {
            mode: d.mode,
            channel: ChannelSpec::new(
                self.profile(&d.profile)?,
                DopplerDraw::Uniform {
                    lo: d.doppler_hz[0],
                    hi: d.doppler_hz[1],
                },
            ),
            snr_range_db: (d.snr_db[0], d.snr_db[1]),
            n_samples: d.n_samples,
            val_fraction: d.val_fraction,
            noise: d.noise,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn train_hyperparams(&self) -> Result<Hyperparams> {
        let t = require(&self.train, "train")?;
        t.schedule.apply(Hyperparams::for_mode(t.mode))
    }

    pub fn finetune_hyperparams(&self) -> Result<Hyperparams> {
        require(&self.finetune, "finetune")?
            .schedule
            .apply(Hyperparams::fine_tune())
    }

    pub fn sweep_spec(&self, base: &Path, seed: u64) -> Result<SweepSpec> {
        let s = require(&self.sweep, "sweep")?;
        let mut estimators = s
            .estimators
            .iter()
            .map(|n| Estimator::builtin(n))
            .collect::<Result<Vec<_>>>()?;
        let mut finetuned = Vec::new();
        for n in &s.network {
            let e = Estimator::load_network(n.name.clone(), &base.join(&n.weights))?;
            match n.prune_ratio {
                Some(r) => finetuned.push((r, e)),
                None => estimators.push(e),
            }
        }
        Ok(SweepSpec {
            kind: s.kind,
            axis: s.axis.clone(),
            realizations: s.realizations,
            profile: self.profile(&s.profile)?,
            snr_db: s.snr_db,
            doppler_hz: s.doppler_hz,
            dg_snrs_db: s.dg_snrs_db.clone(),
            estimators,
            finetuned,
            genie: GenieSource {
                n_mc: s.genie_realizations,
                seed: crate::rng::mix_seed(seed, crate::rng::streams::GENIE),
                cache_dir: s.genie_cache.as_ref().map(|p| base.join(p)),
            },
            seed,
        })
    }

    pub fn probe_spec(&self, base: &Path, seed: u64) -> Result<SweepSpec> {
        let p = require(&self.probe, "probe")?;
        let e = Estimator::load_network("network", &base.join(&p.weights))?;
        Ok(SweepSpec {
            kind: ExperimentKind::AttentionProbe,
            axis: Vec::new(),
            realizations: p.realizations,
            profile: self.profile(&p.profile)?,
            snr_db: p.snr_db,
            doppler_hz: p.doppler_hz,
            dg_snrs_db: Vec::new(),
            estimators: vec![e],
            finetuned: Vec::new(),
            genie: GenieSource {
                n_mc: 1,
                seed,
                cache_dir: None,
            },
            seed,
        })
    }

    /// Dynamic spec plus the named model files to load.
    pub fn online_spec(&self, seed: u64) -> Result<(DynamicSpec, Vec<(String, PathBuf)>)> {
        let o = require(&self.online, "online")?;
        let label = match o.label.to_ascii_lowercase().as_str() {
            "mmse" => LabelDesign::Mmse,
            "power-boost" | "power_boost" | "ls" => LabelDesign::PowerBoost,
            other => return Err(Error::Config(format!("unknown label design {other}"))),
        };
        let segments = o
            .segments
            .iter()
            .map(|n| self.profile(n).map(|p| (p, o.segment_realizations)))
            .collect::<Result<Vec<_>>>()?;
        let mut hp = Hyperparams::streaming();
        if let Some(lr) = o.lr {
            hp.initial_lr = lr;
        }
        let spec = DynamicSpec {
            segments,
            snr_range_db: (o.snr_db[0], o.snr_db[1]),
            doppler_range_hz: (o.doppler_hz[0], o.doppler_hz[1]),
            boost_db: o.boost_db,
            label,
            window: o.window,
            block: o.block,
            settle: o.settle.min(o.segment_realizations),
            hp,
            seed,
        };
        spec.validate()?;
        if o.model.is_empty() {
            return Err(Error::Config("[online] needs at least one [[online.model]]".into()));
        }
        Ok((
            spec,
            o.model.iter().map(|m| (m.name.clone(), m.weights.clone())).collect(),
        ))
    }
}
