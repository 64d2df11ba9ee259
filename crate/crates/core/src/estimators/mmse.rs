use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{linear_time_to_frame, GenieCorrelations, PilotEstimate};
use crate::channel::uniform_delay_correlation;
use crate::error::{Error, Result};
use crate::ofdm::{Grid, PilotPattern, SnrSpec};

/// W = R_cross (R_obs + diag(noise))^-1, falling back to a pseudo-inverse
/// when the regularized matrix is singular (e.g. zero noise).
pub fn mmse_filter(
    r_cross: &DMatrix<Complex64>,
    r_obs: &DMatrix<Complex64>,
    noise: &[f64],
) -> Result<DMatrix<Complex64>> {
    let p = r_obs.nrows();
    if r_obs.ncols() != p || r_cross.ncols() != p || noise.len() != p {
        return Err(Error::shape(
            "mmse_filter",
            &[r_cross.nrows(), r_cross.ncols()],
            &[r_obs.nrows(), r_obs.ncols()],
        ));
    }
    let mut a = r_obs.clone();
    for (i, n) in noise.iter().enumerate() {
        a[(i, i)] += Complex64::new(*n, 0.0);
    }
    if noise.iter().all(|n| *n > 0.0) {
        if let Some(ch) = a.clone().cholesky() {
            // A Hermitian: W = (A^-1 R_cross^H)^H
            return Ok(ch.solve(&r_cross.adjoint()).adjoint());
        }
    }
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
    let pinv = a
        .pseudo_inverse(scale * 1e-10)
        .map_err(|e| Error::invalid(format!("mmse_filter: {e}")))?;
    Ok(r_cross * pinv)
}

/// Precomputed 1D frequency-domain MMSE filters for one SNR.
#[derive(Debug, Clone)]
pub struct FdMmse1d {
    filters: Vec<DMatrix<Complex64>>,
    pilot_symbols: Vec<usize>,
    n_symbols: usize,
}

impl FdMmse1d {
    pub fn new(corr: &GenieCorrelations, pattern: &PilotPattern, snr: SnrSpec) -> Result<Self> {
        let var = snr.noise_var();
        let mut filters = Vec::new();
        let mut pilot_symbols = Vec::new();
        for p in pattern.feature_symbols() {
            let r = corr.symbol(p.symbol)?;
            let cross = r.select_columns(&p.subcarriers);
            let obs = cross.select_rows(&p.subcarriers);
            // LS noise at a pilot of amplitude |x| is var / |x|^2
            let noise: Vec<f64> = p
                .subcarriers
                .iter()
                .map(|k| var / pattern.values[(*k, p.symbol)].norm_sqr())
                .collect();
            filters.push(mmse_filter(&cross, &obs, &noise)?);
            pilot_symbols.push(p.symbol);
        }
        Ok(FdMmse1d {
            filters,
            pilot_symbols,
            n_symbols: pattern.frame.n_symbols,
        })
    }

    /// Denoised channel on every subcarrier of each pilot symbol.
    pub fn pilot_symbols_estimate(&self, ls: &PilotEstimate) -> Result<DMatrix<Complex64>> {
        if ls.h.ncols() != self.filters.len() || ls.h.nrows() != self.filters[0].ncols() {
            return Err(Error::shape(
                "fd_mmse_1d",
                &[ls.h.nrows(), ls.h.ncols()],
                &[self.filters[0].ncols(), self.filters.len()],
            ));
        }
        let mut out = DMatrix::zeros(self.filters[0].nrows(), self.filters.len());
        for (j, w) in self.filters.iter().enumerate() {
            out.set_column(j, &(w * ls.h.column(j)));
        }
        Ok(out)
    }

    pub fn estimate(&self, ls: &PilotEstimate) -> Result<Grid> {
        let h = self.pilot_symbols_estimate(ls)?;
        linear_time_to_frame(&h, &self.pilot_symbols, self.n_symbols)
    }
}

pub fn fd_mmse_1d(ls: &PilotEstimate, corr: &GenieCorrelations, pattern: &PilotPattern, snr: SnrSpec) -> Result<Grid> {
    FdMmse1d::new(corr, pattern, snr)?.estimate(ls)
}

/// Precomputed per-symbol MMSE filters using every RE with a known,
/// nonzero transmitted value (genie access to the whole X).
#[derive(Debug, Clone)]
pub struct FdMmse2d {
    filters: Vec<(Vec<usize>, DMatrix<Complex64>)>,
}

impl FdMmse2d {
    /// `magnitudes` holds |X| per RE; zero marks an unobserved RE.
    pub fn new(corr: &GenieCorrelations, magnitudes: &DMatrix<f64>, snr: SnrSpec) -> Result<Self> {
        let var = snr.noise_var();
        let mut filters = Vec::with_capacity(magnitudes.ncols());
        for l in 0..magnitudes.ncols() {
            let active: Vec<usize> = (0..magnitudes.nrows()).filter(|k| magnitudes[(*k, l)] > 0.0).collect();
            if active.is_empty() {
                return Err(Error::invalid(format!("fd_mmse_2d: symbol {l} has no observed REs")));
            }
            let r = corr.symbol(l)?;
            let cross = r.select_columns(&active);
            let obs = cross.select_rows(&active);
            let noise: Vec<f64> = active.iter().map(|k| var / magnitudes[(*k, l)].powi(2)).collect();
            filters.push((active, mmse_filter(&cross, &obs, &noise)?));
        }
        Ok(FdMmse2d { filters })
    }

    /// Magnitudes for a pattern whose data REs carry unit-power symbols.
    pub fn magnitudes_for(pattern: &PilotPattern) -> DMatrix<f64> {
        DMatrix::from_fn(pattern.values.nrows(), pattern.values.ncols(), |k, l| {
            if pattern.is_data(k, l) {
                1.0
            } else {
                pattern.values[(k, l)].norm()
            }
        })
    }

    pub fn estimate(&self, y: &Grid, x: &Grid) -> Result<Grid> {
        if y.shape() != x.shape() || y.ncols() != self.filters.len() {
            return Err(Error::shape(
                "fd_mmse_2d",
                &[y.nrows(), y.ncols()],
                &[x.nrows(), x.ncols()],
            ));
        }
        let mut out = Grid::zeros(y.nrows(), y.ncols());
        for (l, (active, w)) in self.filters.iter().enumerate() {
            let ls = nalgebra::DVector::from_iterator(active.len(), active.iter().map(|k| y[(*k, l)] / x[(*k, l)]));
            out.set_column(l, &(w * ls));
        }
        Ok(out)
    }
}

pub fn fd_mmse_2d(y: &Grid, x: &Grid, corr: &GenieCorrelations, snr: SnrSpec) -> Result<Grid> {
    let mags = x.map(|v| v.norm());
    FdMmse2d::new(corr, &mags, snr)?.estimate(y, x)
}

/// Frequency-domain Wiener smoother built from the uniform-delay
/// correlation: F = R (R + var I)^-1.
#[derive(Debug, Clone)]
pub struct WienerDenoiser {
    pub filter: DMatrix<Complex64>,
}

impl WienerDenoiser {
    pub fn new(n_f: usize, cp_samples: f64, snr: SnrSpec) -> Result<Self> {
        let r = uniform_delay_correlation(n_f, cp_samples)?;
        if snr.noise_var() == 0.0 {
            // limit of R (R + eps I)^-1 for positive definite R; a pseudo-inverse
            // would instead project out the numerically tiny eigenvalues
            return Ok(WienerDenoiser {
                filter: DMatrix::identity(n_f, n_f),
            });
        }
        let noise = vec![snr.noise_var(); n_f];
        Ok(WienerDenoiser {
            filter: mmse_filter(&r, &r, &noise)?,
        })
    }

    pub fn apply(&self, h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if h.nrows() != self.filter.ncols() {
            return Err(Error::shape("wiener", &[h.nrows(), h.ncols()], &[self.filter.ncols()]));
        }
        Ok(&self.filter * h)
    }
}
