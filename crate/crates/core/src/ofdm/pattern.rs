use nalgebra::DMatrix;
use rand::Rng;

use super::{qpsk::qpsk_map, FrameConfig, Grid};
use crate::error::{Error, Result};
use crate::rng::{rng_for, streams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternKind {
    SingleDmrs,
    /// Each comb feature symbol is followed by a full-band label symbol boosted by `boost_db`.
    DoubleDmrs {
        boost_db: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotRole {
    Feature,
    Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotSymbol {
    pub symbol: usize,
    pub role: PilotRole,
    pub subcarriers: Vec<usize>,
    pub amplitude: f64,
}

/// Pilot layout plus the known pilot values of every pilot RE.
#[derive(Debug, Clone)]
pub struct PilotPattern {
    pub kind: PatternKind,
    pub frame: FrameConfig,
    pub symbols: Vec<PilotSymbol>,
    /// known pilot values; zero outside pilot REs
    pub values: Grid,
    /// true where the RE carries payload
    data: DMatrix<bool>,
}

/// Default seed for the fixed pilot sequence.
pub const PILOT_SEED: u64 = 0x0D15_EA5E;

impl PilotPattern {
    pub fn single(frame: &FrameConfig) -> Result<Self> {
        Self::build(frame, PatternKind::SingleDmrs, PILOT_SEED)
    }

    pub fn double(frame: &FrameConfig, boost_db: f64) -> Result<Self> {
        Self::build(frame, PatternKind::DoubleDmrs { boost_db }, PILOT_SEED)
    }

    pub fn build(frame: &FrameConfig, kind: PatternKind, pilot_seed: u64) -> Result<Self> {
        frame.validate()?;
        let n_f = frame.n_subcarriers;
        let mut symbols = Vec::new();
        for (j, &s) in frame.pilot_symbols.iter().enumerate() {
            // alternate comb offset between consecutive pilot symbols
            let offset = j % frame.comb_spacing;
            symbols.push(PilotSymbol {
                symbol: s,
                role: PilotRole::Feature,
                subcarriers: (offset..n_f).step_by(frame.comb_spacing).collect(),
                amplitude: 1.0,
            });
        }
        if let PatternKind::DoubleDmrs { boost_db } = kind {
            if !boost_db.is_finite() {
                return Err(Error::invalid("double DM-RS boost must be finite"));
            }
            let amp = 10f64.powf(boost_db / 20.0);
            for &s in &frame.pilot_symbols {
                let label = s + 1;
                if label >= frame.n_symbols || frame.pilot_symbols.contains(&label) {
                    return Err(Error::invalid(format!(
                        "double DM-RS: no free label symbol after pilot symbol {s}"
                    )));
                }
                symbols.push(PilotSymbol {
                    symbol: label,
                    role: PilotRole::Label,
                    subcarriers: (0..n_f).collect(),
                    amplitude: amp,
                });
            }
        }
        symbols.sort_by_key(|p| p.symbol);

        let mut rng = rng_for(pilot_seed, streams::PILOTS);
        let mut values = Grid::zeros(n_f, frame.n_symbols);
        let mut data = DMatrix::from_element(n_f, frame.n_symbols, true);
        // feature pilots first so both patterns share the same comb sequence
        let ordered = symbols
            .iter()
            .filter(|p| p.role == PilotRole::Feature)
            .chain(symbols.iter().filter(|p| p.role == PilotRole::Label));
        for p in ordered {
            data.column_mut(p.symbol).fill(false);
            for &k in &p.subcarriers {
                let b0 = rng.random_range(0..2u8);
                let b1 = rng.random_range(0..2u8);
                values[(k, p.symbol)] = qpsk_map(b0, b1) * p.amplitude;
            }
        }
        Ok(PilotPattern {
            kind,
            frame: frame.clone(),
            symbols,
            values,
            data,
        })
    }

    pub fn feature_symbols(&self) -> impl Iterator<Item = &PilotSymbol> {
        self.symbols.iter().filter(|p| p.role == PilotRole::Feature)
    }

    pub fn label_symbols(&self) -> impl Iterator<Item = &PilotSymbol> {
        self.symbols.iter().filter(|p| p.role == PilotRole::Label)
    }

    pub fn is_data(&self, k: usize, l: usize) -> bool {
        self.data[(k, l)]
    }

    pub fn n_data_re(&self) -> usize {
        self.data.iter().filter(|d| **d).count()
    }

    pub fn n_pilot_re(&self) -> usize {
        self.symbols.iter().map(|p| p.subcarriers.len()).sum()
    }

    /// Data symbol indices in ascending order.
    pub fn data_symbols(&self) -> Vec<usize> {
        (0..self.frame.n_symbols).filter(|l| self.data[(0, *l)]).collect()
    }

    /// Mean transmitted power per RE over the whole slot (unit-power data).
    pub fn average_slot_power(&self) -> f64 {
        let pilot: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (pilot + self.n_data_re() as f64) / (self.frame.n_subcarriers * self.frame.n_symbols) as f64
    }

    /// Average slot power of `self` relative to `other`, in dB.
    pub fn power_delta_db(&self, other: &PilotPattern) -> f64 {
        10.0 * (self.average_slot_power() / other.average_slot_power()).log10()
    }
}
