use nalgebra::DMatrix;
use num_complex::Complex64;

use super::Numerology;
use crate::error::{Error, Result};

/// Bessel function of the first kind, order zero.
///
/// Polynomial/asymptotic approximations from Abramowitz & Stegun 9.4.1 and
/// 9.4.3; absolute error below 1e-7.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 3.0 {
        let y = (x / 3.0).powi(2);
        1.0 + y
            * (-2.249_999_7
                + y * (1.265_620_8 + y * (-0.316_386_6 + y * (0.044_447_9 + y * (-0.003_944_4 + y * 0.000_210_0)))))
    } else {
        let y = 3.0 / ax;
        let f0 = 0.797_884_56
            + y * (-0.000_000_77
                + y * (-0.005_527_40
                    + y * (-0.000_095_12 + y * (0.001_372_37 + y * (-0.000_728_05 + y * 0.000_144_76)))));
        let t0 = ax - std::f64::consts::FRAC_PI_4
            + y * (-0.041_663_97
                + y * (-0.000_039_54
                    + y * (0.002_625_73 + y * (-0.000_541_25 + y * (-0.000_293_33 + y * 0.000_135_58)))));
        f0 * t0.cos() / ax.sqrt()
    }
}

/// Jakes time correlation between taps `lag` OFDM symbols apart.
pub fn time_correlation(f_d_hz: f64, lag_symbols: i64) -> f64 {
    let t = Numerology::default().symbol_period_s();
    bessel_j0(2.0 * std::f64::consts::PI * f_d_hz * t * lag_symbols as f64)
}

/// Frequency correlation of a channel whose delay is uniform over the
/// whole cyclic prefix, with unit diagonal.
pub fn uniform_delay_correlation(n_f: usize, cp_samples: f64) -> Result<DMatrix<Complex64>> {
    if n_f == 0 || cp_samples <= 0.0 || !cp_samples.is_finite() {
        return Err(Error::invalid(format!(
            "uniform_delay_correlation: n_f={n_f}, cp={cp_samples}"
        )));
    }
    Ok(DMatrix::from_fn(n_f, n_f, |i, j| {
        if i == j {
            return Complex64::new(1.0, 0.0);
        }
        let x = 2.0 * std::f64::consts::PI * cp_samples * (i as f64 - j as f64) / n_f as f64;
        let ix = Complex64::new(0.0, x);
        // exact zeros where the exponent lands on a multiple of 2*pi
        let turns = x / (2.0 * std::f64::consts::PI);
        if (turns - turns.round()).abs() < 1e-12 {
            return Complex64::new(0.0, 0.0);
        }
        (Complex64::new(1.0, 0.0) - (-ix).exp()) / ix
    }))
}
