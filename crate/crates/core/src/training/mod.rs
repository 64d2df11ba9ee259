//! Dataset generation, offline training, online label construction and
//! streaming online updates.

mod dataset;
mod hyper;
mod io;
mod online;
mod train;

pub use dataset::{generate_offline_dataset, simulate_sample, Dataset, DatasetSpec, SampleMeta, TrainingSample};
pub use hyper::Hyperparams;
pub use io::{load_dataset, save_dataset};
pub use online::{
    make_online_label_mmse, make_online_label_power_boost, online_sample_from_received, online_step, LabelDesign,
    OnlineLabeler, OnlineSample, OnlineTrainer,
};
pub(crate) use train::run_epoch;
pub use train::{batch_gradients, evaluate_loss, sample_gradients, train, write_loss_curve, EpochStats, TrainReport};
