use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimators::{EstimateSource, PilotEstimate};
use crate::nn::Tensor;
use crate::scalar::Real;

/// Stack the columns of a complex matrix into a `(rows*cols) x 2` tensor:
/// row `j*rows + i` holds entry (i, j); channel 0 real, channel 1 imaginary.
pub fn channel_to_tensor<T: Real>(m: &DMatrix<Complex64>) -> Tensor<T> {
    let mut data = Vec::with_capacity(2 * m.len());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            data.push(T::lit(m[(i, j)].re));
            data.push(T::lit(m[(i, j)].im));
        }
    }
    Tensor::new(&[m.len(), 2], data).expect("nonempty matrix")
}

fn tensor_to_matrix<T: Real>(y: &Tensor<T>, rows: usize) -> Result<DMatrix<Complex64>> {
    let s = y.shape();
    if s.len() != 2 || s[1] != 2 || rows == 0 || !s[0].is_multiple_of(rows) {
        return Err(Error::shape("tensor to channel", s, &[rows, 2]));
    }
    let cols = s[0] / rows;
    let d = y.data();
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        let r = j * rows + i;
        Complex64::new(d[2 * r].as_f64(), d[2 * r + 1].as_f64())
    }))
}

/// Network input from pilot LS estimates.
pub fn input_from_ls<T: Real>(est: &PilotEstimate) -> Tensor<T> {
    channel_to_tensor(&est.h)
}

/// Inverse of [`input_from_ls`].
pub fn tensor_to_pilot_estimate<T: Real>(x: &Tensor<T>, pilots_per_symbol: usize) -> Result<PilotEstimate> {
    Ok(PilotEstimate {
        h: tensor_to_matrix(x, pilots_per_symbol)?,
        source: EstimateSource::Network,
    })
}

/// Network output to a complex `n_subcarriers x (rows / n_subcarriers)` matrix.
pub fn output_to_channel<T: Real>(y: &Tensor<T>, n_subcarriers: usize) -> Result<DMatrix<Complex64>> {
    tensor_to_matrix(y, n_subcarriers)
}
