use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Regression loss used for training. Both variants average over all elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LossSpec {
    Huber { delta: f64 },
    Mse,
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::Huber { delta: 1.0 }
    }
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LossSpec::Huber { delta } if !(delta > 0.0) => {
                Err(Error::invalid(format!("Huber delta must be > 0, got {delta}")))
            }
            _ => Ok(()),
        }
    }
}

/// Elementwise Huber loss of residual `a`.
#[inline]
pub fn huber<T: Real>(a: T, delta: T) -> T {
    let abs = a.abs();
    if abs <= delta {
        T::lit(0.5) * a * a
    } else {
        delta * (abs - T::lit(0.5) * delta)
    }
}

#[inline]
pub fn huber_grad<T: Real>(a: T, delta: T) -> T {
    if a.abs() <= delta {
        a
    } else {
        delta * a.signum()
    }
}

/// Mean Huber loss over paired slices.
pub fn huber_loss<T: Real>(pred: &[T], target: &[T], delta: T) -> Result<T> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::shape("huber_loss", &[pred.len()], &[target.len()]));
    }
    let s: T = pred.iter().zip(target).map(|(&p, &t)| huber(p - t, delta)).sum();
    Ok(s / T::from_usize(pred.len()).unwrap())
}

/// Mean squared error over paired slices.
pub fn mse_loss<T: Real>(pred: &[T], target: &[T]) -> Result<T> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::shape("mse_loss", &[pred.len()], &[target.len()]));
    }
    let s: T = pred.iter().zip(target).map(|(&p, &t)| (p - t) * (p - t)).sum();
    Ok(s / T::from_usize(pred.len()).unwrap())
}
