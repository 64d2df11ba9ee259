use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{Numerology, PowerDelayProfile};
use crate::error::{Error, Result};
use crate::rng::{rng_for, streams};

/// Maximum Doppler shift and sum-of-sinusoids resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerSpec {
    pub f_max_hz: f64,
    pub n_sinusoids: usize,
}

impl DopplerSpec {
    pub fn new(f_max_hz: f64) -> Self {
        DopplerSpec {
            f_max_hz,
            n_sinusoids: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_max_hz >= 0.0 && self.f_max_hz.is_finite()) {
            return Err(Error::invalid(format!("doppler f_max {} must be >= 0", self.f_max_hz)));
        }
        if self.n_sinusoids < 8 {
            return Err(Error::invalid(format!(
                "doppler needs at least 8 sinusoids, got {}",
                self.n_sinusoids
            )));
        }
        Ok(())
    }
}

/// One slot's worth of fading: per-symbol path taps and frequency response.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// paths x symbols
    pub taps: DMatrix<Complex64>,
    /// subcarriers x symbols
    pub h: DMatrix<Complex64>,
    pub profile: String,
    pub f_d_hz: f64,
    /// path delays in (fractional) samples
    pub delays_samples: Vec<f64>,
}

impl ChannelRealization {
    /// Frequency response of given taps: H[k,l] = sum_m a_m[l] exp(-i 2 pi k d_m / N).
    pub fn response(taps: &DMatrix<Complex64>, delays_samples: &[f64], num: &Numerology) -> DMatrix<Complex64> {
        let mut h = DMatrix::<Complex64>::zeros(num.n_subcarriers, taps.ncols());
        for k in 0..num.n_subcarriers {
            for (m, d) in delays_samples.iter().enumerate() {
                let theta = -2.0 * PI * k as f64 * d / num.fft_samples as f64;
                let e = Complex64::new(theta.cos(), theta.sin());
                for l in 0..taps.ncols() {
                    h[(k, l)] += taps[(m, l)] * e;
                }
            }
        }
        h
    }
}

/// Angle offset in (-pi/(4N), pi/(4N)) distinct for each (path, quadrature).
fn rotation(path: usize, quad: usize, n_paths: usize, n_sin: usize) -> f64 {
    let idx = (2 * path + quad) as f64;
    let slots = (2 * n_paths) as f64;
    PI / (4.0 * n_sin as f64) * (2.0 * idx + 1.0 - slots) / slots
}

/// Generate a realization from an explicit RNG.
pub fn realize_channel_with<R: Rng + ?Sized>(
    pdp: &PowerDelayProfile,
    doppler: &DopplerSpec,
    n_symbols: usize,
    num: &Numerology,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n_symbols == 0 {
        return Err(Error::invalid("realize_channel: n_symbols must be >= 1"));
    }
    doppler.validate()?;
    let gains = pdp.linear_gains();
    let m = gains.len();
    let n_sin = doppler.n_sinusoids;
    let period = num.symbol_period_samples() as f64;
    let times: Vec<f64> = (0..n_symbols)
        .map(|l| (period * l as f64 + period / 2.0) / num.sample_rate_hz)
        .collect();
    let amp = (1.0 / n_sin as f64).sqrt();

    let mut taps = DMatrix::<Complex64>::zeros(m, n_symbols);
    let mut freqs = vec![0.0; n_sin];
    let mut phases = vec![0.0; n_sin];
    for (p, g) in gains.iter().enumerate() {
        let scale = g.sqrt();
        for quad in 0..2 {
            let rot = rotation(p, quad, m, n_sin);
            for n in 0..n_sin {
                let alpha = PI / (2.0 * n_sin as f64) * (n as f64 + 0.5) + rot;
                freqs[n] = 2.0 * PI * doppler.f_max_hz * alpha.cos();
                phases[n] = rng.random::<f64>() * 2.0 * PI;
            }
            for (l, t) in times.iter().enumerate() {
                let mu: f64 = freqs.iter().zip(&phases).map(|(w, ph)| (w * t + ph).cos()).sum::<f64>() * amp * scale;
                if quad == 0 {
                    taps[(p, l)].re = mu;
                } else {
                    taps[(p, l)].im = mu;
                }
            }
        }
    }
    let delays = pdp.delays_samples(num);
    let h = ChannelRealization::response(&taps, &delays, num);
    Ok(ChannelRealization {
        taps,
        h,
        profile: pdp.name().to_string(),
        f_d_hz: doppler.f_max_hz,
        delays_samples: delays,
    })
}

/// Generate a realization keyed by `seed` with the default numerology.
pub fn realize_channel(
    pdp: &PowerDelayProfile,
    doppler: &DopplerSpec,
    n_symbols: usize,
    seed: u64,
) -> Result<ChannelRealization> {
    let mut rng = rng_for(seed, streams::CHANNEL);
    realize_channel_with(pdp, doppler, n_symbols, &Numerology::default(), &mut rng)
}
