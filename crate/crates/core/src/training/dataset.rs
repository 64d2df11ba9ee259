use rand::Rng;

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::estimators::ls_estimate;
use crate::model::{channel_to_tensor, input_from_ls, Mode};
use crate::nn::Tensor;
use crate::ofdm::{
    apply_channel, build_slot, extract_pilot_ls_input, random_payload, FrameConfig, PilotPattern, SnrSpec,
};
use crate::rng::{mix_seed, rng_for, streams};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleMeta {
    pub snr_db: f64,
    pub doppler_hz: f64,
    pub profile: String,
    pub seed: u64,
}

/// One supervised pair: marshalled noisy LS input and noise-free channel label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    /// `72 x 2`
    pub feature: Tensor<f64>,
    /// `1008 x 2` (offline) or `144 x 2` (online)
    pub label: Tensor<f64>,
    pub meta: SampleMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub mode: Mode,
    pub train: Vec<TrainingSample>,
    pub val: Vec<TrainingSample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.train.len() + self.val.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub mode: Mode,
    /// profile plus the per-realization Doppler distribution
    pub channel: ChannelSpec,
    pub snr_range_db: (f64, f64),
    pub n_samples: usize,
    pub val_fraction: f64,
    /// false: features are noise-free (debugging / validation)
    pub noise: bool,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.snr_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::invalid(format!("SNR range [{lo}, {hi}]")));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::invalid(format!("validation fraction {}", self.val_fraction)));
        }
        self.channel.doppler.validate()
    }
}

/// Simulate one slot and turn it into a training pair. Everything random is
/// drawn from `sample_seed`, so samples can be regenerated independently.
pub fn simulate_sample(spec: &DatasetSpec, pattern: &PilotPattern, sample_seed: u64) -> Result<TrainingSample> {
    let frame = &pattern.frame;
    let mut rng = rng_for(sample_seed, streams::DATASET);
    let (lo, hi) = spec.snr_range_db;
    let snr_db = if lo == hi { lo } else { rng.random_range(lo..hi) };
    let real = spec.channel.draw(frame.n_symbols, &frame.numerology, &mut rng)?;
    let payload = random_payload(pattern, &mut rng);
    let x = build_slot(&payload, pattern)?;
    let snr = if spec.noise {
        SnrSpec::db(snr_db)
    } else {
        SnrSpec::noiseless()
    };
    let y = apply_channel(&x, &real.h, snr, &mut rng)?;
    let (yp, xp) = extract_pilot_ls_input(&y.grid, pattern)?;
    let feature = input_from_ls(&ls_estimate(&yp, &xp)?);
    let label = match spec.mode {
        Mode::Offline => channel_to_tensor(&real.h),
        Mode::Online => channel_to_tensor(&real.h.select_columns(&frame.pilot_symbols)),
    };
    if !label.is_finite() {
        return Err(Error::invalid("non-finite channel label"));
    }
    Ok(TrainingSample {
        feature,
        label,
        meta: SampleMeta {
            snr_db,
            doppler_hz: real.f_d_hz,
            profile: spec.channel.profile.name().to_string(),
            seed: sample_seed,
        },
    })
}

/// Draw `n_samples` independent slots (SNR and maximum Doppler uniform per
/// sample) and split off the trailing `val_fraction` for validation.
pub fn generate_offline_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let pattern = PilotPattern::single(&FrameConfig::default())?;
    let samples = (0..spec.n_samples)
        .map(|i| simulate_sample(spec, &pattern, mix_seed(spec.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let n_val = (spec.val_fraction * spec.n_samples as f64).round() as usize;
    let mut train = samples;
    let val = train.split_off(spec.n_samples - n_val);
    Ok(Dataset {
        mode: spec.mode,
        train,
        val,
    })
}
