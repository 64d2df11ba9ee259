//! Classical channel estimators: LS, interpolation, genie FD-MMSE (1D and
//! 2D), decision-directed estimation and Wiener denoising.

mod cache;
mod ddce;
mod genie;
mod interp;
mod ls;
mod mmse;

pub use cache::{load_matrices, save_matrices};
pub use ddce::{dd_ce, DdCeOutcome};
pub use genie::{genie_correlations, genie_correlations_cached, GenieCorrelations};
pub use interp::{bilinear_to_frame, interp_linear, linear_time_to_frame};
pub use ls::{ls_estimate, EstimateSource, PilotEstimate};
pub use mmse::{fd_mmse_1d, fd_mmse_2d, mmse_filter, FdMmse1d, FdMmse2d, WienerDenoiser};
