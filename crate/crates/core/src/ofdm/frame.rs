use crate::channel::Numerology;
use crate::error::{Error, Result};

/// Slot dimensions and pilot-symbol placement (0-based symbol indices).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub n_subcarriers: usize,
    pub n_symbols: usize,
    pub comb_spacing: usize,
    pub pilot_symbols: Vec<usize>,
    pub numerology: Numerology,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            n_subcarriers: 72,
            n_symbols: 14,
            comb_spacing: 2,
            pilot_symbols: vec![0, 12],
            numerology: Numerology::default(),
        }
    }
}

impl FrameConfig {
    pub fn n_pilot(&self) -> usize {
        self.pilot_symbols.len()
    }

    /// Pilots per pilot symbol in the comb layout.
    pub fn pilots_per_symbol(&self) -> usize {
        self.n_subcarriers / self.comb_spacing
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 || self.comb_spacing == 0 || !self.n_subcarriers.is_multiple_of(self.comb_spacing) {
            return Err(Error::invalid(format!(
                "frame: {} subcarriers not divisible by comb spacing {}",
                self.n_subcarriers, self.comb_spacing
            )));
        }
        if self.pilot_symbols.is_empty() || self.pilot_symbols.iter().any(|s| *s >= self.n_symbols) {
            return Err(Error::invalid(format!(
                "frame: pilot symbols {:?} outside 0..{}",
                self.pilot_symbols, self.n_symbols
            )));
        }
        if self.pilot_symbols.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("frame: pilot symbols must be strictly increasing"));
        }
        if self.n_subcarriers != self.numerology.n_subcarriers {
            return Err(Error::invalid("frame: subcarrier count disagrees with numerology"));
        }
        Ok(())
    }
}

/// Per-RE signal-to-noise ratio for unit-power QPSK.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub snr_db: f64,
}

impl SnrSpec {
    pub fn db(snr_db: f64) -> Self {
        SnrSpec { snr_db }
    }

    pub fn noiseless() -> Self {
        SnrSpec { snr_db: f64::INFINITY }
    }

    /// Noise variance relative to unit symbol power; 0 for an infinite SNR.
    pub fn noise_var(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }
}
