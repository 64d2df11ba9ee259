use super::{input_from_ls, output_to_channel, Mode, ModelWeights};
use crate::error::Result;
use crate::estimators::{linear_time_to_frame, PilotEstimate};
use crate::ofdm::{FrameConfig, Grid};
use crate::scalar::Real;

impl<T: Real> ModelWeights<T> {
    /// Whole-slot estimate from pilot LS. The online network predicts the
    /// pilot symbols only; the remaining symbols are filled in linearly.
    pub fn estimate_frame(&self, ls: &PilotEstimate, frame: &FrameConfig) -> Result<Grid> {
        let y = self.predict(&input_from_ls(ls))?;
        let h = output_to_channel(&y, frame.n_subcarriers)?;
        match self.config.mode {
            Mode::Offline => Ok(h),
            Mode::Online => linear_time_to_frame(&h, &frame.pilot_symbols, frame.n_symbols),
        }
    }
}
