use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::nn::{OptimizerKind, QNetConfig, RewardNetConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epsilon: f64,
    pub gamma: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment steps between copies of the online network into the target network.
    pub target_sync_period: usize,
    /// Transitions collected before the first update.
    pub warmup: usize,
    /// Environment steps to run; the last episode may be cut short.
    pub total_steps: usize,
    /// Actuators selected per training episode.
    pub budget: usize,
    pub seed: u64,
    /// Relabel measurement coordinates by a random cyclic shift each time a stored sample is
    /// replayed. Values and rewards are invariant under any consistent relabelling.
    pub shift_augmentation: bool,
    pub optimizer: OptimizerKind,
    pub encoder_widths: Vec<usize>,
    pub head_widths: Vec<usize>,
    pub reward_widths: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            gamma: 1.0,
            replay_capacity: 20_000,
            batch_size: 64,
            target_sync_period: 500,
            warmup: 500,
            total_steps: 12_000,
            budget: 6,
            seed: 0,
            shift_augmentation: true,
            optimizer: OptimizerKind::default(),
            encoder_widths: vec![64, 64],
            head_widths: vec![32],
            reward_widths: vec![64, 32],
        }
    }
}

impl TrainConfig {
    pub fn qnet_config(&self, n: usize, m: usize) -> QNetConfig {
        QNetConfig {
            n,
            m,
            encoder_widths: self.encoder_widths.clone(),
            head_widths: self.head_widths.clone(),
        }
    }

    pub fn reward_net_config(&self, n: usize, m: usize) -> RewardNetConfig {
        RewardNetConfig {
            n,
            m,
            hidden_widths: self.reward_widths.clone(),
        }
    }

    /// Checks the hyperparameters against an instance family with `m` candidates.
    pub fn validate(&self, m: usize) -> Result<()> {
        let bad = |field: &str, message: String| {
            Err(Error::Validation {
                field: field.into(),
                message,
            })
        };
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad("epsilon", format!("must lie in [0, 1], got {}", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", format!("must lie in [0, 1], got {}", self.gamma));
        }
        if self.replay_capacity == 0 {
            return bad("replay_capacity", "must be positive".into());
        }
        if self.batch_size == 0 || self.batch_size > self.replay_capacity {
            return bad(
                "batch_size",
                format!(
                    "must lie in 1..={}, got {}",
                    self.replay_capacity, self.batch_size
                ),
            );
        }
        if self.target_sync_period == 0 {
            return bad("target_sync_period", "must be positive".into());
        }
        if self.budget == 0 || self.budget > m {
            return bad("budget", format!("must lie in 1..={m}, got {}", self.budget));
        }
        let lr = match self.optimizer {
            OptimizerKind::Sgd { lr } | OptimizerKind::Adam { lr, .. } => lr,
        };
        if !(lr > 0.0 && lr.is_finite()) {
            return bad("optimizer.lr", format!("must be positive, got {lr}"));
        }
        Ok(())
    }

    /// Validates against a training set, which must be non-empty with a common `(n, m)`.
    pub(crate) fn validate_for(&self, instances: &[Instance]) -> Result<(usize, usize)> {
        let first = instances
            .first()
            .ok_or_else(|| Error::Config("training set is empty".into()))?;
        let dims = (first.n(), first.m());
        if let Some(i) = instances.iter().position(|x| (x.n(), x.m()) != dims) {
            return Err(Error::Validation {
                field: format!("instances[{i}]"),
                message: format!(
                    "dimensions {}x{} differ from the first instance's {}x{}",
                    instances[i].n(),
                    instances[i].m(),
                    dims.0,
                    dims.1
                ),
            });
        }
        self.validate(dims.1)?;
        Ok(dims)
    }
}
