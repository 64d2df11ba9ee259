use rand::Rng;

use crate::scalar::Real;

/// Glorot-uniform samples on `[-l, l]`, `l = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<T: Real, R: Rng + ?Sized>(n: usize, fan_in: usize, fan_out: usize, rng: &mut R) -> Vec<T> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| T::lit(rng.random_range(-limit..=limit))).collect()
}
