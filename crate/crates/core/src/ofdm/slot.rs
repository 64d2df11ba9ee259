use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::qpsk::{qpsk_demodulate, qpsk_map};
use super::{Grid, PilotPattern, SnrSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRole {
    Transmitted,
    Received,
    Channel,
    Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub grid: Grid,
    pub role: SlotRole,
}

impl Slot {
    pub fn new(grid: Grid, role: SlotRole) -> Self {
        Slot { grid, role }
    }
}

/// Uniform random payload sized for `pattern`.
pub fn random_payload<R: Rng + ?Sized>(pattern: &PilotPattern, rng: &mut R) -> Vec<u8> {
    (0..2 * pattern.n_data_re()).map(|_| rng.random_range(0..2u8)).collect()
}

/// Place pilots and QPSK payload onto the grid. Data REs are filled
/// symbol by symbol, ascending subcarrier within each symbol.
pub fn build_slot(payload: &[u8], pattern: &PilotPattern) -> Result<Slot> {
    let need = 2 * pattern.n_data_re();
    if payload.len() != need {
        return Err(Error::invalid(format!(
            "build_slot: payload has {} bits, need {need}",
            payload.len()
        )));
    }
    if payload.iter().any(|b| *b > 1) {
        return Err(Error::invalid("build_slot: bits must be 0 or 1"));
    }
    let mut grid = pattern.values.clone();
    let mut bits = payload.chunks(2);
    for l in 0..grid.ncols() {
        for k in 0..grid.nrows() {
            if pattern.is_data(k, l) {
                let b = bits.next().unwrap();
                grid[(k, l)] = qpsk_map(b[0], b[1]);
            }
        }
    }
    Ok(Slot::new(grid, SlotRole::Transmitted))
}

/// Y = H o X + W with circular Gaussian W of variance `snr.noise_var()`.
pub fn apply_channel<R: Rng + ?Sized>(x: &Slot, h: &Grid, snr: SnrSpec, rng: &mut R) -> Result<Slot> {
    if x.grid.shape() != h.shape() {
        return Err(Error::shape(
            "apply_channel",
            &[x.grid.nrows(), x.grid.ncols()],
            &[h.nrows(), h.ncols()],
        ));
    }
    let mut y = x.grid.component_mul(h);
    let var = snr.noise_var();
    if var > 0.0 {
        let sd = (var / 2.0).sqrt();
        for v in y.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex64::new(re, im) * sd;
        }
    }
    Ok(Slot::new(y, SlotRole::Received))
}

/// Received and known values at the feature pilots, one column per pilot symbol.
pub fn extract_pilot_ls_input(y: &Grid, pattern: &PilotPattern) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    if y.shape() != pattern.values.shape() {
        return Err(Error::shape(
            "extract_pilot_ls_input",
            &[y.nrows(), y.ncols()],
            &[pattern.values.nrows(), pattern.values.ncols()],
        ));
    }
    let feats: Vec<_> = pattern.feature_symbols().collect();
    let n = feats[0].subcarriers.len();
    let mut yp = DMatrix::zeros(n, feats.len());
    let mut xp = DMatrix::zeros(n, feats.len());
    for (j, p) in feats.iter().enumerate() {
        for (i, &k) in p.subcarriers.iter().enumerate() {
            yp[(i, j)] = y[(k, p.symbol)];
            xp[(i, j)] = pattern.values[(k, p.symbol)];
        }
    }
    Ok((yp, xp))
}

/// Error tally; erasures count as half a bit error each.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BitErrors {
    pub errors: f64,
    pub bits: usize,
}

impl BitErrors {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors / self.bits as f64
        }
    }

    pub fn merge(&mut self, other: BitErrors) {
        self.errors += other.errors;
        self.bits += other.bits;
    }
}

/// Zero-forcing equalization of the data REs followed by hard decisions.
pub fn equalize_and_count_errors(y: &Grid, h_hat: &Grid, payload: &[u8], pattern: &PilotPattern) -> Result<BitErrors> {
    if y.shape() != h_hat.shape() || y.shape() != pattern.values.shape() {
        return Err(Error::shape(
            "equalize_and_count_errors",
            &[y.nrows(), y.ncols()],
            &[h_hat.nrows(), h_hat.ncols()],
        ));
    }
    if payload.len() != 2 * pattern.n_data_re() {
        return Err(Error::invalid(format!(
            "equalize: payload has {} bits, need {}",
            payload.len(),
            2 * pattern.n_data_re()
        )));
    }
    let mut tally = BitErrors {
        errors: 0.0,
        bits: payload.len(),
    };
    let mut bits = payload.chunks(2);
    for l in 0..y.ncols() {
        for k in 0..y.nrows() {
            if !pattern.is_data(k, l) {
                continue;
            }
            let b = bits.next().unwrap();
            let h = h_hat[(k, l)];
            if h.norm() < 1e-12 || !h.is_finite() {
                tally.errors += 1.0;
                continue;
            }
            let d = qpsk_demodulate(&[y[(k, l)] / h]);
            tally.errors += ((d[0] != b[0]) as u8 + (d[1] != b[1]) as u8) as f64;
        }
    }
    Ok(tally)
}
