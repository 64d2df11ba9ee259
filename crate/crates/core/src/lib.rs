//! Link-level OFDM simulation, classical channel estimators and the
//! Channelformer attention-based neural channel estimator.

mod binio;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod model;
pub mod nn;
pub mod ofdm;
pub mod pruning;
pub mod rng;
pub mod scalar;
pub mod training;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Tensor64 = nn::Tensor<f64>;
pub type Tensor32 = nn::Tensor<f32>;
pub type ModelWeights64 = model::ModelWeights<f64>;
pub type ModelWeights32 = model::ModelWeights<f32>;
