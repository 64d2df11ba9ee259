use crate::error::{Error, Result};
use crate::ofdm::Grid;

/// Error energies below this are clamped when forming a dB ratio.
pub const DG_ERROR_FLOOR: f64 = 1e-15;

fn check(a: &Grid, b: &Grid, op: &'static str) -> Result<()> {
    if a.shape() != b.shape() || a.is_empty() {
        return Err(Error::shape(op, &[a.nrows(), a.ncols()], &[b.nrows(), b.ncols()]));
    }
    Ok(())
}

/// Mean squared complex deviation over every RE.
pub fn mse(h_hat: &Grid, h: &Grid) -> Result<f64> {
    check(h_hat, h, "mse")?;
    Ok(h_hat.iter().zip(h.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / h.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoisingGain {
    pub db: f64,
    /// the method's error fell below [`DG_ERROR_FLOOR`]
    pub capped: bool,
}

/// `10 log10(|H_ls - H|^2 / |H_method - H|^2)`.
pub fn denoising_gain(h_ls: &Grid, h_method: &Grid, h: &Grid) -> Result<DenoisingGain> {
    check(h_ls, h, "denoising_gain")?;
    check(h_method, h, "denoising_gain")?;
    let e_ls: f64 = h_ls.iter().zip(h.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    let e_m: f64 = h_method.iter().zip(h.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(DenoisingGain {
        db: 10.0 * (e_ls.max(DG_ERROR_FLOOR) / e_m.max(DG_ERROR_FLOOR)).log10(),
        capped: e_m < DG_ERROR_FLOOR,
    })
}

/// Running mean and standard error (sample std / sqrt(n)).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Stats {
    pub fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn std_err(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

impl FromIterator<f64> for Stats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Stats::default();
        for v in iter {
            s.push(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn dg_cases() {
        let h = Grid::from_element(4, 2, Complex64::new(1.0, 0.0));
        let ls = h.map(|v| v + Complex64::new(1.0, 0.0));
        assert_eq!(denoising_gain(&ls, &ls, &h).unwrap().db, 0.0);
        let m = h.map(|v| v + Complex64::new(0.1_f64.sqrt(), 0.0));
        assert!((denoising_gain(&ls, &m, &h).unwrap().db - 10.0).abs() < 1e-12);
        let perfect = denoising_gain(&ls, &h, &h).unwrap();
        assert!(perfect.capped);
        assert!((perfect.db - 10.0 * (8.0 / 1e-15_f64).log10()).abs() < 1e-9);
    }

    #[test]
    fn standard_error() {
        let s: Stats = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(s.mean(), 2.5);
        // sample variance 5/3
        assert!((s.std_err() - (5.0_f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(Stats::default().std_err().is_nan());
    }
}
