use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PilotEstimate;
use crate::error::{Error, Result};
use crate::ofdm::{Grid, PilotPattern};

/// Piecewise-linear interpolation through (xs, ys), continuing the end
/// segments linearly outside [xs[0], xs[n-1]]. `xs` must be increasing.
pub fn interp_linear(xs: &[f64], ys: &[Complex64], x: f64) -> Complex64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let seg = match xs.iter().position(|&v| v > x) {
        None => n - 2,
        Some(0) => 0,
        Some(i) => (i - 1).min(n - 2),
    };
    let t = (x - xs[seg]) / (xs[seg + 1] - xs[seg]);
    ys[seg] + (ys[seg + 1] - ys[seg]) * t
}

/// Per-subcarrier linear interpolation in time between pilot-symbol columns.
pub fn linear_time_to_frame(h_sym: &DMatrix<Complex64>, pilot_symbols: &[usize], n_symbols: usize) -> Result<Grid> {
    if h_sym.ncols() != pilot_symbols.len() || pilot_symbols.is_empty() {
        return Err(Error::shape(
            "linear_time_to_frame",
            &[h_sym.nrows(), h_sym.ncols()],
            &[pilot_symbols.len()],
        ));
    }
    if pilot_symbols.windows(2).any(|w| w[1] <= w[0]) || pilot_symbols.iter().any(|s| *s >= n_symbols) {
        return Err(Error::invalid(format!(
            "linear_time_to_frame: bad pilot symbols {pilot_symbols:?}"
        )));
    }
    let xs: Vec<f64> = pilot_symbols.iter().map(|s| *s as f64).collect();
    let mut out = Grid::zeros(h_sym.nrows(), n_symbols);
    let mut ys = vec![Complex64::new(0.0, 0.0); xs.len()];
    for k in 0..h_sym.nrows() {
        for (j, y) in ys.iter_mut().enumerate() {
            *y = h_sym[(k, j)];
        }
        for l in 0..n_symbols {
            out[(k, l)] = interp_linear(&xs, &ys, l as f64);
        }
    }
    Ok(out)
}

/// Separable interpolation of comb pilot estimates to the whole slot:
/// linear in frequency within each pilot symbol, then linear in time.
pub fn bilinear_to_frame(est: &PilotEstimate, pattern: &PilotPattern) -> Result<Grid> {
    let feats: Vec<_> = pattern.feature_symbols().collect();
    if est.h.ncols() != feats.len() {
        return Err(Error::shape(
            "bilinear_to_frame",
            &[est.h.nrows(), est.h.ncols()],
            &[feats[0].subcarriers.len(), feats.len()],
        ));
    }
    let n_f = pattern.frame.n_subcarriers;
    let mut per_symbol = DMatrix::zeros(n_f, feats.len());
    for (j, p) in feats.iter().enumerate() {
        if p.subcarriers.len() != est.h.nrows() {
            return Err(Error::shape(
                "bilinear_to_frame",
                &[est.h.nrows(), est.h.ncols()],
                &[p.subcarriers.len(), feats.len()],
            ));
        }
        let xs: Vec<f64> = p.subcarriers.iter().map(|k| *k as f64).collect();
        let ys: Vec<Complex64> = est.h.column(j).iter().copied().collect();
        for k in 0..n_f {
            per_symbol[(k, j)] = interp_linear(&xs, &ys, k as f64);
        }
    }
    let syms: Vec<usize> = feats.iter().map(|p| p.symbol).collect();
    linear_time_to_frame(&per_symbol, &syms, pattern.frame.n_symbols)
}
