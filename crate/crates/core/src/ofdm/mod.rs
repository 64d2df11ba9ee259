//! Slot-level OFDM link: frame layout, pilot patterns, QPSK, the
//! frequency-domain channel model and BER accounting.

mod frame;
mod pattern;
pub(crate) mod qpsk;
mod slot;
mod time_domain;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use frame::{FrameConfig, SnrSpec};
pub use pattern::{PatternKind, PilotPattern, PilotRole, PilotSymbol};
pub use qpsk::{qpsk_demodulate, qpsk_map, qpsk_modulate};
pub use slot::{
    apply_channel, build_slot, equalize_and_count_errors, extract_pilot_ls_input, random_payload, BitErrors, Slot,
    SlotRole,
};
pub use time_domain::{ofdm_demodulate, ofdm_modulate, ofdm_time_domain_roundtrip, time_domain_channel};

/// Complex resource grid, subcarriers x OFDM symbols.
pub type Grid = DMatrix<Complex64>;
