use rand::Rng;

use super::{realize_channel_with, ChannelRealization, DopplerSpec, Numerology, PowerDelayProfile};
use crate::error::{Error, Result};

/// How each realization picks its maximum Doppler shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DopplerDraw {
    Fixed(f64),
    /// Uniform on [lo, hi].
    Uniform {
        lo: f64,
        hi: f64,
    },
}

impl DopplerDraw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DopplerDraw::Fixed(f) => f >= 0.0 && f.is_finite(),
            DopplerDraw::Uniform { lo, hi } => lo >= 0.0 && hi >= lo && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad Doppler draw {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DopplerDraw::Fixed(f) => f,
            DopplerDraw::Uniform { lo, hi } if hi > lo => rng.random_range(lo..=hi),
            DopplerDraw::Uniform { lo, .. } => lo,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            DopplerDraw::Fixed(f) => format!("{f}"),
            DopplerDraw::Uniform { lo, hi } => format!("{lo}-{hi}"),
        }
    }
}

/// A delay profile plus a Doppler distribution: the statistical channel model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub profile: PowerDelayProfile,
    pub doppler: DopplerDraw,
    pub n_sinusoids: usize,
}

impl ChannelSpec {
    pub fn new(profile: PowerDelayProfile, doppler: DopplerDraw) -> Self {
        ChannelSpec {
            profile,
            doppler,
            n_sinusoids: 20,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, n_symbols: usize, num: &Numerology, rng: &mut R) -> Result<ChannelRealization> {
        self.doppler.validate()?;
        let f = self.doppler.sample(rng);
        let d = DopplerSpec {
            f_max_hz: f,
            n_sinusoids: self.n_sinusoids,
        };
        realize_channel_with(&self.profile, &d, n_symbols, num, rng)
    }
}
