use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{FrameConfig, Grid, Slot};
use crate::error::{Error, Result};

/// Unitary IFFT per symbol with cyclic prefix; returns the serial sample stream.
pub fn ofdm_modulate(x: &Grid, frame: &FrameConfig) -> Result<Vec<Complex64>> {
    let num = &frame.numerology;
    let n = num.fft_samples;
    if x.nrows() != n {
        return Err(Error::shape(
            "ofdm_modulate",
            &[x.nrows(), x.ncols()],
            &[n, frame.n_symbols],
        ));
    }
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let scale = 1.0 / (n as f64).sqrt();
    let mut out = Vec::with_capacity(x.ncols() * num.symbol_period_samples());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..x.ncols() {
        buf.copy_from_slice(x.column(l).as_slice());
        ifft.process(&mut buf);
        buf.iter_mut().for_each(|v| *v *= scale);
        out.extend_from_slice(&buf[n - num.cp_samples..]);
        out.extend_from_slice(&buf);
    }
    Ok(out)
}

/// Strip the cyclic prefix and apply the unitary FFT per symbol.
pub fn ofdm_demodulate(samples: &[Complex64], frame: &FrameConfig) -> Result<Grid> {
    let num = &frame.numerology;
    let (n, per) = (num.fft_samples, num.symbol_period_samples());
    if samples.is_empty() || !samples.len().is_multiple_of(per) {
        return Err(Error::invalid(format!(
            "ofdm_demodulate: {} samples is not a whole number of {per}-sample symbols",
            samples.len()
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let n_sym = samples.len() / per;
    let mut grid = DMatrix::zeros(n, n_sym);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..n_sym {
        let start = l * per + num.cp_samples;
        buf.copy_from_slice(&samples[start..start + n]);
        fft.process(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            grid[(k, l)] = v * scale;
        }
    }
    Ok(grid)
}

pub fn ofdm_time_domain_roundtrip(x: &Slot, frame: &FrameConfig) -> Result<Slot> {
    let samples = ofdm_modulate(&x.grid, frame)?;
    Ok(Slot::new(ofdm_demodulate(&samples, frame)?, x.role))
}

/// Linear convolution with integer-delay taps that are held constant per
/// output symbol (validation path for the frequency-domain model).
pub fn time_domain_channel(
    samples: &[Complex64],
    taps: &DMatrix<Complex64>,
    delays: &[usize],
    frame: &FrameConfig,
) -> Result<Vec<Complex64>> {
    let per = frame.numerology.symbol_period_samples();
    if taps.nrows() != delays.len() || taps.ncols() * per != samples.len() {
        return Err(Error::shape(
            "time_domain_channel",
            &[taps.nrows(), taps.ncols()],
            &[delays.len(), samples.len() / per.max(1)],
        ));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); samples.len()];
    for (t, o) in out.iter_mut().enumerate() {
        let l = t / per;
        for (m, &d) in delays.iter().enumerate() {
            if t >= d {
                *o += taps[(m, l)] * samples[t - d];
            }
        }
    }
    Ok(out)
}
