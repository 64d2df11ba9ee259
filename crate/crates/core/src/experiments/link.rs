use std::path::{Path, PathBuf};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::estimators::{
    bilinear_to_frame, dd_ce, genie_correlations, genie_correlations_cached, ls_estimate, FdMmse1d, FdMmse2d,
    GenieCorrelations, PilotEstimate, WienerDenoiser,
};
use crate::model::{load_weights, ModelWeights};
use crate::ofdm::{apply_channel, build_slot, extract_pilot_ls_input, random_payload, Grid, PilotPattern, SnrSpec};
use crate::rng::{rng_for, streams};

/// One simulated slot seen by every estimator under comparison.
#[derive(Debug, Clone)]
pub struct LinkDraw {
    pub h: Grid,
    pub x: Grid,
    pub y: Grid,
    pub payload: Vec<u8>,
    pub ls: PilotEstimate,
    pub f_d_hz: f64,
}

pub fn simulate_link(channel: &ChannelSpec, pattern: &PilotPattern, snr: SnrSpec, seed: u64) -> Result<LinkDraw> {
    let frame = &pattern.frame;
    let mut rng = rng_for(seed, streams::SWEEP);
    let real = channel.draw(frame.n_symbols, &frame.numerology, &mut rng)?;
    let payload = random_payload(pattern, &mut rng);
    let x = build_slot(&payload, pattern)?;
    let y = apply_channel(&x, &real.h, snr, &mut rng)?;
    let (yp, xp) = extract_pilot_ls_input(&y.grid, pattern)?;
    let ls = ls_estimate(&yp, &xp)?;
    Ok(LinkDraw {
        h: real.h,
        x: x.grid,
        y: y.grid,
        payload,
        ls,
        f_d_hz: real.f_d_hz,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// LS at the pilots, bilinear interpolation
    Ls,
    DdCe,
    Mmse1d,
    Mmse2d,
    Network,
    /// true channel (BER bound)
    Perfect,
}

impl EstimatorKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name.to_ascii_lowercase().as_str() {
            "ls" => EstimatorKind::Ls,
            "dd-ce" | "ddce" => EstimatorKind::DdCe,
            "mmse-1d" | "fd-mmse-1d" => EstimatorKind::Mmse1d,
            "mmse-2d" | "fd-mmse-2d" => EstimatorKind::Mmse2d,
            "perfect" => EstimatorKind::Perfect,
            _ => return Err(Error::UnknownEstimator(name.to_string())),
        })
    }

    fn needs_genie(self) -> bool {
        matches!(self, EstimatorKind::Mmse1d | EstimatorKind::Mmse2d)
    }
}

/// A named estimator ready to run.
#[derive(Debug, Clone)]
pub struct Estimator {
    pub name: String,
    pub kind: EstimatorKind,
    pub model: Option<ModelWeights<f64>>,
}

impl Estimator {
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(Estimator {
            name: name.to_ascii_lowercase(),
            kind: EstimatorKind::parse(name)?,
            model: None,
        })
    }

    pub fn network(name: impl Into<String>, model: ModelWeights<f64>) -> Self {
        Estimator {
            name: name.into(),
            kind: EstimatorKind::Network,
            model: Some(model),
        }
    }

    pub fn load_network(name: impl Into<String>, path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::io(
                PathBuf::from(path),
                std::io::Error::from(std::io::ErrorKind::NotFound),
            ));
        }
        Ok(Self::network(name, load_weights(path)?))
    }
}

/// Per-(channel model, SNR) state: genie statistics and prebuilt filters.
pub struct LinkContext {
    pub pattern: PilotPattern,
    pub snr: SnrSpec,
    mmse1d: Option<FdMmse1d>,
    mmse2d: Option<FdMmse2d>,
    wiener: Option<WienerDenoiser>,
}

/// How to obtain genie correlations.
#[derive(Debug, Clone)]
pub struct GenieSource {
    pub n_mc: usize,
    pub seed: u64,
    pub cache_dir: Option<PathBuf>,
}

impl GenieSource {
    pub fn correlations(&self, channel: &ChannelSpec, n_symbols: usize) -> Result<GenieCorrelations> {
        match &self.cache_dir {
            Some(dir) => genie_correlations_cached(channel, n_symbols, self.n_mc, self.seed, dir),
            None => genie_correlations(channel, n_symbols, self.n_mc, self.seed),
        }
    }
}

impl LinkContext {
    pub fn new(
        pattern: &PilotPattern,
        snr: SnrSpec,
        corr: Option<&GenieCorrelations>,
        estimators: &[Estimator],
    ) -> Result<Self> {
        let need_genie = estimators.iter().any(|e| e.kind.needs_genie());
        let corr = match (need_genie, corr) {
            (true, None) => return Err(Error::invalid("MMSE estimators need genie correlations")),
            (true, Some(c)) => Some(c),
            (false, _) => None,
        };
        let has = |k| estimators.iter().any(|e| e.kind == k);
        let mmse1d = match corr {
            Some(c) if has(EstimatorKind::Mmse1d) => Some(FdMmse1d::new(c, pattern, snr)?),
            _ => None,
        };
        let mmse2d = match corr {
            Some(c) if has(EstimatorKind::Mmse2d) => Some(FdMmse2d::new(c, &FdMmse2d::magnitudes_for(pattern), snr)?),
            _ => None,
        };
        let wiener = if has(EstimatorKind::DdCe) {
            let num = &pattern.frame.numerology;
            Some(WienerDenoiser::new(num.n_subcarriers, num.cp_samples as f64, snr)?)
        } else {
            None
        };
        Ok(LinkContext {
            pattern: pattern.clone(),
            snr,
            mmse1d,
            mmse2d,
            wiener,
        })
    }

    /// Whole-slot channel estimate of `e` for one draw.
    pub fn estimate(&self, e: &Estimator, d: &LinkDraw) -> Result<Grid> {
        let missing = || Error::invalid(format!("estimator {} was not prepared", e.name));
        match e.kind {
            EstimatorKind::Ls => bilinear_to_frame(&d.ls, &self.pattern),
            EstimatorKind::DdCe => {
                let init = bilinear_to_frame(&d.ls, &self.pattern)?;
                Ok(dd_ce(
                    &d.y,
                    &init,
                    &self.pattern,
                    self.wiener.as_ref().ok_or_else(missing)?,
                    100,
                )?
                .h)
            }
            EstimatorKind::Mmse1d => self.mmse1d.as_ref().ok_or_else(missing)?.estimate(&d.ls),
            EstimatorKind::Mmse2d => self.mmse2d.as_ref().ok_or_else(missing)?.estimate(&d.y, &d.x),
            EstimatorKind::Network => e
                .model
                .as_ref()
                .ok_or_else(missing)?
                .estimate_frame(&d.ls, &self.pattern.frame),
            EstimatorKind::Perfect => Ok(d.h.clone()),
        }
    }
}
