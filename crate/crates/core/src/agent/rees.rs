use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::policy::select_action;
use crate::agent::replay::ReplayBuffer;
use crate::agent::runner::{run, Learner};
use crate::agent::{TrainConfig, TrainOutput};
use crate::env::{StateMatrix, Transition};
use crate::error::Result;
use crate::model::Instance;
use crate::nn::{build_input, Optimizer, Parameters, RewardNet};
use crate::seed;

const CHUNK: usize = 16;

/// One regression sample: the chosen candidate's input row and the reward it earned.
#[derive(Debug, Clone)]
struct Sample {
    row: Vec<f64>,
    reward: f64,
}

impl Sample {
    /// Rotates both halves of the row by the same random cyclic shift.
    fn shifted(&self, rng: &mut ChaCha8Rng) -> Sample {
        let n = self.row.len() / 2;
        let shift = rng.random_range(0..n);
        let mut row = vec![0.0; self.row.len()];
        for half in 0..2 {
            for i in 0..n {
                row[half * n + (i + shift) % n] = self.row[half * n + i];
            }
        }
        Sample {
            row,
            reward: self.reward,
        }
    }
}

/// Mean squared error of predicted against observed rewards, with its gradient.
fn mse_and_gradient(net: &RewardNet, batch: &[&Sample]) -> Result<(f64, RewardNet)> {
    let b = batch.len() as f64;
    let partials = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = net.zeros_like();
            let mut loss = 0.0;
            for s in chunk {
                let trace = net.forward_trace(&s.row)?;
                let err = trace.output()[0] - s.reward;
                loss += err * err;
                net.backward(&trace, 2.0 * err / b, &mut grad);
            }
            Ok((loss, grad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut iter = partials.into_iter();
    let (mut loss, mut grad) = iter.next().expect("non-empty batch");
    for (l, g) in iter {
        loss += l;
        grad.add_assign(&g);
    }
    Ok((loss / b, grad))
}

struct Rees {
    net: RewardNet,
    optimizer: Optimizer,
    buffer: ReplayBuffer<Sample>,
    batch_size: usize,
    warmup: usize,
    augment: bool,
}

impl Learner for Rees {
    type Params = RewardNet;

    fn act(&self, state: &StateMatrix, epsilon: f64, rng: &mut ChaCha8Rng) -> Result<usize> {
        select_action(&self.net, state, epsilon, rng)
    }

    fn observe(&mut self, t: Transition) {
        let row = build_input(&t.state).row(t.action).to_vec();
        self.buffer.push(Sample {
            row,
            reward: t.reward,
        });
    }

    fn learn(&mut self, _step: usize, rng: &mut ChaCha8Rng) -> std::result::Result<Option<f64>, String> {
        if self.buffer.len() < self.warmup.max(self.batch_size) {
            return Ok(None);
        }
        let batch = self.buffer.sample(self.batch_size, rng).expect("buffer holds a batch");
        let shifted: Vec<Sample>;
        let batch = if self.augment {
            shifted = batch.into_iter().map(|s| s.shifted(rng)).collect();
            shifted.iter().collect()
        } else {
            batch
        };
        let (loss, grad) = mse_and_gradient(&self.net, &batch).map_err(|e| e.to_string())?;
        if !loss.is_finite() {
            return Err(format!("non-finite regression loss {loss}"));
        }
        let backup = self.net.clone();
        if let Err(e) = self.optimizer.step(&mut self.net, &grad) {
            self.net = backup;
            return Err(e.to_string());
        }
        Ok(Some(loss))
    }

    fn into_params(self) -> RewardNet {
        self.net
    }
}

/// Trains the per-candidate reward regressor on rewards observed while acting epsilon-greedily
/// over its own predictions.
pub fn train_rees(instances: &[Instance], config: &TrainConfig) -> Result<TrainOutput<RewardNet>> {
    let (n, m) = config.validate_for(instances)?;
    let mut init_rng = seed::rng(seed::derive(config.seed, "rees/init"));
    let learner = Rees {
        net: RewardNet::new(config.reward_net_config(n, m), &mut init_rng)?,
        optimizer: Optimizer::new(config.optimizer),
        buffer: ReplayBuffer::new(config.replay_capacity),
        batch_size: config.batch_size,
        warmup: config.warmup,
        augment: config.shift_augmentation,
    };
    run(learner, instances, config, "rees/act")
}
