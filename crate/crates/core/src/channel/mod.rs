//! Multipath Rayleigh fading: delay profiles, sum-of-sinusoids Doppler
//! generation and the closed-form correlation functions.

mod correlation;
mod fading;
mod pdp;
mod spec;

pub use correlation::{bessel_j0, time_correlation, uniform_delay_correlation};
pub use fading::{realize_channel, realize_channel_with, ChannelRealization, DopplerSpec};
pub use pdp::{load_profiles, parse_profiles, standard_pdp, PowerDelayProfile, ProfileDef, STANDARD_PROFILES};
pub use spec::{ChannelSpec, DopplerDraw};

/// Sampling numerology shared by the channel and OFDM layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerology {
    pub n_subcarriers: usize,
    pub fft_samples: usize,
    pub cp_samples: usize,
    pub sample_rate_hz: f64,
}

impl Default for Numerology {
    fn default() -> Self {
        Numerology {
            n_subcarriers: 72,
            fft_samples: 72,
            cp_samples: 16,
            sample_rate_hz: 1.08e6,
        }
    }
}

impl Numerology {
    /// Samples per OFDM symbol including the cyclic prefix.
    pub fn symbol_period_samples(&self) -> usize {
        self.fft_samples + self.cp_samples
    }

    /// Duration of one OFDM symbol including the cyclic prefix, in seconds.
    pub fn symbol_period_s(&self) -> f64 {
        self.symbol_period_samples() as f64 / self.sample_rate_hz
    }

    pub fn ns_to_samples(&self, ns: f64) -> f64 {
        ns * 1e-9 * self.sample_rate_hz
    }
}
