use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gray map: first bit picks the real sign, second bit the imaginary sign.
pub fn qpsk_map(b0: u8, b1: u8) -> Complex64 {
    let re = if b0 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    let im = if b1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::invalid(format!("qpsk: odd bit count {}", bits.len())));
    }
    if bits.iter().any(|b| *b > 1) {
        return Err(Error::invalid("qpsk: bits must be 0 or 1"));
    }
    Ok(bits.chunks(2).map(|c| qpsk_map(c[0], c[1])).collect())
}

/// Quadrant hard decision back to bits.
pub fn qpsk_demodulate(symbols: &[Complex64]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| [(s.re < 0.0) as u8, (s.im < 0.0) as u8])
        .collect()
}

/// Nearest constellation point.
pub(crate) fn hard_decision(s: Complex64) -> Complex64 {
    qpsk_map((s.re < 0.0) as u8, (s.im < 0.0) as u8)
}
