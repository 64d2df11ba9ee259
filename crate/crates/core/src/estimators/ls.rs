use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateSource {
    Ls,
    Mmse,
    Network,
}

/// Channel estimate at the feature pilots, one column per pilot symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotEstimate {
    pub h: DMatrix<Complex64>,
    pub source: EstimateSource,
}

/// Elementwise Y / X at the pilots.
pub fn ls_estimate(y_pilot: &DMatrix<Complex64>, x_pilot: &DMatrix<Complex64>) -> Result<PilotEstimate> {
    if y_pilot.shape() != x_pilot.shape() {
        return Err(Error::shape(
            "ls_estimate",
            &[y_pilot.nrows(), y_pilot.ncols()],
            &[x_pilot.nrows(), x_pilot.ncols()],
        ));
    }
    if x_pilot.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::invalid("ls_estimate: zero pilot value"));
    }
    Ok(PilotEstimate {
        h: y_pilot.component_div(x_pilot),
        source: EstimateSource::Ls,
    })
}
