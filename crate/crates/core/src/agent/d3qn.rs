use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::policy::{double_q_target, select_action};
use crate::agent::replay::ReplayBuffer;
use crate::agent::runner::{run, Learner};
use crate::agent::{TrainConfig, TrainOutput};
use crate::env::{StateMatrix, Transition};
use crate::error::Result;
use crate::model::Instance;
use crate::nn::{build_input, Optimizer, Parameters, QNetwork};
use crate::seed;

/// Minibatch rows per parallel task. Partial gradients are summed in chunk order, so the result
/// does not depend on the thread count.
const CHUNK: usize = 8;

/// Mean squared TD error over the batch and its gradient.
pub(crate) fn td_loss_and_gradient(
    online: &QNetwork,
    target: &QNetwork,
    batch: &[&Transition],
    gamma: f64,
) -> Result<(f64, QNetwork)> {
    let b = batch.len() as f64;
    let partials = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = online.zeros_like();
            let mut loss = 0.0;
            for t in chunk {
                let y = double_q_target(online, target, t, gamma)?;
                let trace = online.forward_trace(&build_input(&t.state))?;
                let err = trace.q[t.action] - y;
                loss += err * err;
                let mut dq = vec![0.0; trace.q.len()];
                dq[t.action] = 2.0 * err / b;
                online.backward(&trace, &dq, &mut grad);
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

struct D3qn {
    online: QNetwork,
    target: QNetwork,
    optimizer: Optimizer,
    buffer: ReplayBuffer<Transition>,
    batch_size: usize,
    warmup: usize,
    sync_period: usize,
    gamma: f64,
    augment: bool,
}

fn shift_transition(t: &Transition, rng: &mut ChaCha8Rng) -> Transition {
    let shift = rng.random_range(0..t.state.n());
    Transition {
        state: Arc::new(t.state.shifted(shift)),
        next_state: Arc::new(t.next_state.shifted(shift)),
        ..t.clone()
    }
}

impl Learner for D3qn {
    type Params = QNetwork;

    fn act(&self, state: &StateMatrix, epsilon: f64, rng: &mut ChaCha8Rng) -> Result<usize> {
        select_action(&self.online, state, epsilon, rng)
    }

    fn observe(&mut self, transition: Transition) {
        self.buffer.push(transition);
    }

    fn learn(&mut self, step: usize, rng: &mut ChaCha8Rng) -> std::result::Result<Option<f64>, String> {
        let mut loss = None;
        if self.buffer.len() >= self.warmup.max(self.batch_size) {
            let batch = self.buffer.sample(self.batch_size, rng).expect("buffer holds a batch");
            let shifted: Vec<Transition>;
            let batch = if self.augment {
                shifted = batch.into_iter().map(|t| shift_transition(t, rng)).collect();
                shifted.iter().collect()
            } else {
                batch
            };
            let (l, grad) = td_loss_and_gradient(&self.online, &self.target, &batch, self.gamma)
                .map_err(|e| e.to_string())?;
            if !l.is_finite() {
                return Err(format!("non-finite TD loss {l}"));
            }
            let backup = self.online.clone();
            if let Err(e) = self.optimizer.step(&mut self.online, &grad) {
                self.online = backup;
                return Err(e.to_string());
            }
            loss = Some(l);
        }
        if step % self.sync_period == 0 {
            self.target = self.online.clone();
        }
        Ok(loss)
    }

    fn into_params(self) -> QNetwork {
        self.online
    }
}

/// Trains a dueling Q-network with double-Q targets, uniform experience replay and a
/// periodically synchronised target network.
pub fn train_d3qn(instances: &[Instance], config: &TrainConfig) -> Result<TrainOutput<QNetwork>> {
    let (n, m) = config.validate_for(instances)?;
    let mut init_rng = seed::rng(seed::derive(config.seed, "d3qn/init"));
    let online = QNetwork::new(config.qnet_config(n, m), &mut init_rng)?;
    let learner = D3qn {
        target: online.clone(),
        online,
        optimizer: Optimizer::new(config.optimizer),
        buffer: ReplayBuffer::new(config.replay_capacity),
        batch_size: config.batch_size,
        warmup: config.warmup,
        sync_period: config.target_sync_period,
        gamma: config.gamma,
        augment: config.shift_augmentation,
    };
    run(learner, instances, config, "d3qn/act")
}
