use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Mode;
use crate::nn::LossSpec;

/// Optimiser schedule. The learning rate for 1-based epoch `e` is
/// `initial_lr * lr_drop_factor^floor((e - 1) / lr_drop_period)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub max_epochs: usize,
    pub initial_lr: f64,
    pub lr_drop_period: usize,
    pub lr_drop_factor: f64,
    pub batch_size: usize,
    pub l2: f64,
    #[serde(default)]
    pub loss: LossSpec,
}

impl Hyperparams {
    pub fn online() -> Self {
        Hyperparams {
            max_epochs: 20,
            initial_lr: 0.002,
            lr_drop_period: 10,
            lr_drop_factor: 0.5,
            batch_size: 128,
            l2: 1e-7,
            loss: LossSpec::Huber { delta: 1.0 },
        }
    }

    /// Streaming steps on 3-sample batches. The offline step size leaves a
    /// steady-state error above plain LS, so the step is ten times smaller.
    pub fn streaming() -> Self {
        Hyperparams {
            initial_lr: 2e-4,
            ..Self::online()
        }
    }

    pub fn offline() -> Self {
        Hyperparams {
            max_epochs: 100,
            lr_drop_period: 50,
            ..Self::online()
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Offline => Self::offline(),
            Mode::Online => Self::online(),
        }
    }

    /// Schedule for fine-tuning a pruned model.
    pub fn fine_tune() -> Self {
        Hyperparams {
            max_epochs: 10,
            initial_lr: 1e-3,
            lr_drop_period: 10,
            batch_size: 32,
            ..Self::online()
        }
    }

    /// Same schedule squeezed into `epochs`, keeping the number of lr drops.
    pub fn with_epochs(&self, epochs: usize) -> Self {
        let period = ((self.lr_drop_period as f64 * epochs as f64 / self.max_epochs as f64).round() as usize).max(1);
        Hyperparams {
            max_epochs: epochs,
            lr_drop_period: period,
            ..self.clone()
        }
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        let drops = epoch.saturating_sub(1) / self.lr_drop_period.max(1);
        self.initial_lr * self.lr_drop_factor.powi(drops as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.max_epochs > 0
            && self.initial_lr > 0.0
            && self.lr_drop_period > 0
            && self.lr_drop_factor > 0.0
            && self.lr_drop_factor <= 1.0
            && self.batch_size > 0
            && self.l2 >= 0.0
            && self.l2.is_finite()
            && self.initial_lr.is_finite();
        if !ok {
            return Err(Error::invalid(format!("bad hyperparameters: {self:?}")));
        }
        self.loss.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offline_schedule() {
        let hp = Hyperparams::offline();
        assert_eq!(hp.lr_at(1), 0.002);
        assert_eq!(hp.lr_at(50), 0.002);
        assert_eq!(hp.lr_at(51), 0.001);
        assert_eq!(hp.lr_at(100), 0.001);
    }

    #[test]
    fn online_schedule() {
        let hp = Hyperparams::online();
        assert_eq!(hp.lr_at(10), 0.002);
        assert_eq!(hp.lr_at(11), 0.001);
        assert_eq!(hp.batch_size, 128);
        assert_eq!(hp.l2, 1e-7);
    }

    #[test]
    fn squeezed_schedule_keeps_drops() {
        let hp = Hyperparams::offline().with_epochs(20);
        assert_eq!(hp.lr_drop_period, 10);
        assert_eq!(hp.lr_at(11), 0.001);
    }

    #[test]
    fn rejects_nonsense() {
        let mut hp = Hyperparams::online();
        hp.lr_drop_factor = 1.5;
        assert!(hp.validate().is_err());
        hp.lr_drop_factor = 0.5;
        hp.batch_size = 0;
        assert!(hp.validate().is_err());
    }

    #[test]
    fn toml_roundtrip() {
        let hp = Hyperparams::fine_tune();
        let s = toml::to_string(&hp).unwrap();
        assert_eq!(toml::from_str::<Hyperparams>(&s).unwrap(), hp);
    }
}
