use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{batch_gradients, Hyperparams};
use crate::error::{Error, Result};
use crate::estimators::{ls_estimate, WienerDenoiser};
use crate::model::{channel_to_tensor, input_from_ls, ModelWeights};
use crate::nn::{AdamState, Tensor};
use crate::ofdm::{extract_pilot_ls_input, Grid, PatternKind, PilotPattern, SnrSpec};

/// One streaming training pair built purely from received quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSample {
    /// `72 x 2`, LS at the comb feature pilots
    pub feature: Tensor<f64>,
    /// `144 x 2`, full-band estimate at the adjacent label symbols
    pub label: Tensor<f64>,
    pub index: u64,
}

/// Full-band LS on a boosted label symbol: `Y ./ X`.
pub fn make_online_label_power_boost(
    y_label: &DVector<Complex64>,
    x_label: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    if y_label.len() != x_label.len() {
        return Err(Error::shape("power-boost label", &[y_label.len()], &[x_label.len()]));
    }
    if x_label.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::invalid("label symbol has an empty subcarrier"));
    }
    Ok(y_label.component_div(x_label))
}

/// LS on the label symbol followed by the uniform-delay Wiener smoother.
pub fn make_online_label_mmse(
    y_label: &DVector<Complex64>,
    x_label: &DVector<Complex64>,
    denoiser: &WienerDenoiser,
) -> Result<DVector<Complex64>> {
    let ls = make_online_label_power_boost(y_label, x_label)?;
    let m = denoiser.apply(&DMatrix::from_column_slice(ls.len(), 1, ls.as_slice()))?;
    Ok(m.column(0).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelDesign {
    PowerBoost,
    Mmse,
}

/// Builds online labels; for [`LabelDesign::Mmse`] it keeps one Wiener filter
/// per SNR grid point so the matrix inverse is paid once.
#[derive(Debug, Clone)]
pub struct OnlineLabeler {
    pub design: LabelDesign,
    pub grid_db: f64,
    filters: BTreeMap<i64, WienerDenoiser>,
}

impl OnlineLabeler {
    pub fn new(design: LabelDesign) -> Self {
        OnlineLabeler {
            design,
            grid_db: 0.5,
            filters: BTreeMap::new(),
        }
    }

    /// Filter for a per-RE label SNR (already including any pilot boost).
    pub fn filter(&mut self, label_snr: SnrSpec, pattern: &PilotPattern) -> Result<&WienerDenoiser> {
        let snr_db = label_snr.snr_db;
        let key = if snr_db.is_finite() {
            (snr_db / self.grid_db).round() as i64
        } else {
            i64::MAX
        };
        if !self.filters.contains_key(&key) {
            let snr = if key == i64::MAX {
                SnrSpec::noiseless()
            } else {
                SnrSpec::db(key as f64 * self.grid_db)
            };
            let num = &pattern.frame.numerology;
            let f = WienerDenoiser::new(pattern.frame.n_subcarriers, num.cp_samples as f64, snr)?;
            self.filters.insert(key, f);
        }
        Ok(&self.filters[&key])
    }

    pub fn cached_filters(&self) -> usize {
        self.filters.len()
    }

    /// Label estimates (subcarriers x label symbols) from the received grid.
    /// `snr` is the per-RE SNR of unit-power symbols.
    pub fn label(&mut self, y: &Grid, pattern: &PilotPattern, snr: SnrSpec) -> Result<DMatrix<Complex64>> {
        let PatternKind::DoubleDmrs { boost_db } = pattern.kind else {
            return Err(Error::invalid("online labels need a double DM-RS pattern"));
        };
        let labels: Vec<usize> = pattern.label_symbols().map(|p| p.symbol).collect();
        let n_f = pattern.frame.n_subcarriers;
        let mut out = DMatrix::zeros(n_f, labels.len());
        for (j, &l) in labels.iter().enumerate() {
            let yl = y.column(l).into_owned();
            let xl = pattern.values.column(l).into_owned();
            let h = match self.design {
                LabelDesign::PowerBoost => make_online_label_power_boost(&yl, &xl)?,
                LabelDesign::Mmse => {
                    let f = self.filter(SnrSpec::db(snr.snr_db + boost_db), pattern)?;
                    make_online_label_mmse(&yl, &xl, f)?
                }
            };
            out.set_column(j, &h);
        }
        Ok(out)
    }
}

/// Feature from the comb pilots, label from the adjacent boosted symbols.
/// Only the received grid and the known pilots are used.
pub fn online_sample_from_received(
    y: &Grid,
    pattern: &PilotPattern,
    labeler: &mut OnlineLabeler,
    snr: SnrSpec,
    index: u64,
) -> Result<OnlineSample> {
    let (yp, xp) = extract_pilot_ls_input(y, pattern)?;
    let feature = input_from_ls(&ls_estimate(&yp, &xp)?);
    let label = channel_to_tensor(&labeler.label(y, pattern, snr)?);
    Ok(OnlineSample { feature, label, index })
}

/// Streaming trainer: one Adam step per batch, optimiser state carried over.
#[derive(Debug, Clone)]
pub struct OnlineTrainer {
    pub weights: ModelWeights<f64>,
    pub hp: Hyperparams,
    pub batch_size: usize,
    adam: AdamState<f64>,
}

impl OnlineTrainer {
    /// Starts from (offline-trained) `weights`; the step size is `hp.initial_lr`.
    pub fn new(weights: ModelWeights<f64>, hp: Hyperparams, batch_size: usize) -> Result<Self> {
        hp.validate()?;
        if batch_size == 0 {
            return Err(Error::invalid("online batch size must be positive"));
        }
        let adam = AdamState::new(&weights.sizes(), hp.initial_lr, hp.l2);
        Ok(OnlineTrainer {
            weights,
            hp,
            batch_size,
            adam,
        })
    }

    pub fn steps(&self) -> u64 {
        self.adam.step_count()
    }

    /// Returns the batch loss before the update.
    pub fn step(&mut self, batch: &[OnlineSample]) -> Result<f64> {
        online_step(self, batch)
    }
}

pub fn online_step(t: &mut OnlineTrainer, batch: &[OnlineSample]) -> Result<f64> {
    if batch.len() != t.batch_size {
        return Err(Error::invalid(format!(
            "online batch has {} samples, expected {}",
            batch.len(),
            t.batch_size
        )));
    }
    let pairs: Vec<_> = batch.iter().map(|s| (&s.feature, &s.label)).collect();
    let (loss, grads) = batch_gradients(&t.weights, &pairs, t.hp.loss)?;
    if !loss.is_finite() {
        return Err(Error::Diverged {
            epoch: t.adam.step_count() as usize + 1,
        });
    }
    let masks = t.weights.masks();
    let masked = t.weights.has_masks();
    let mut params: Vec<&mut [f64]> = t.weights.params.iter_mut().map(|p| p.tensor.data_mut()).collect();
    t.adam.step(&mut params, &grads, masked.then_some(masks.as_slice()))?;
    Ok(loss)
}
