use nalgebra::DMatrix;

use super::WienerDenoiser;
use crate::error::{Error, Result};
use crate::ofdm::qpsk::hard_decision;
use crate::ofdm::{Grid, PilotPattern};

#[derive(Debug, Clone)]
pub struct DdCeOutcome {
    pub h: Grid,
    /// final symbol decisions (known pilots in place, zero where unobserved)
    pub x_hat: Grid,
    /// decision passes until the decisions stopped changing (or the cap)
    pub iterations: usize,
    pub converged: bool,
}

/// Decision-directed estimation: alternate hard decisions X = hard(Y / H)
/// and re-estimation H = Y / X on data REs (known pilots substituted),
/// then Wiener-smooth every symbol in frequency.
pub fn dd_ce(
    y: &Grid,
    h_init: &Grid,
    pattern: &PilotPattern,
    wiener: &WienerDenoiser,
    max_iter: usize,
) -> Result<DdCeOutcome> {
    if y.shape() != h_init.shape() || y.shape() != pattern.values.shape() {
        return Err(Error::shape(
            "dd_ce",
            &[y.nrows(), y.ncols()],
            &[h_init.nrows(), h_init.ncols()],
        ));
    }
    if max_iter == 0 {
        return Err(Error::invalid("dd_ce: max_iter must be >= 1"));
    }
    let (nf, ns) = y.shape();
    let known = |k: usize, l: usize| pattern.values[(k, l)].norm() > 0.0;
    let decide = |h: &Grid| {
        DMatrix::from_fn(nf, ns, |k, l| {
            if known(k, l) {
                pattern.values[(k, l)]
            } else if pattern.is_data(k, l) && h[(k, l)].norm() > 0.0 {
                hard_decision(y[(k, l)] / h[(k, l)])
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
    };
    let mut h = h_init.clone();
    let mut x_hat = decide(&h);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        for l in 0..ns {
            for k in 0..nf {
                if x_hat[(k, l)].norm() > 0.0 {
                    h[(k, l)] = y[(k, l)] / x_hat[(k, l)];
                }
            }
        }
        let next = decide(&h);
        if next == x_hat {
            converged = true;
            break;
        }
        x_hat = next;
    }
    Ok(DdCeOutcome {
        h: wiener.apply(&h)?,
        x_hat,
        iterations,
        converged,
    })
}
