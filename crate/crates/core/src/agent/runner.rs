use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::agent::{EpisodeLog, TrainConfig, TrainOutput, TrainStatus};
use crate::env::{EpisodeConfig, PlacementEnv, StateMatrix, Transition};
use crate::error::{Error, Result};
use crate::model::{rms_gap, Instance};
use crate::seed;

/// The parts of a trainer that differ between the Q-learner and the reward estimator.
pub(crate) trait Learner {
    type Params;

    fn act(&self, state: &StateMatrix, epsilon: f64, rng: &mut ChaCha8Rng) -> Result<usize>;

    fn observe(&mut self, transition: Transition);

    /// Runs at most one optimisation step after environment step `step` (1-based) and returns
    /// its loss. `Err` carries a divergence reason; the learner has restored its last finite
    /// parameters by then.
    fn learn(&mut self, step: usize, rng: &mut ChaCha8Rng) -> std::result::Result<Option<f64>, String>;

    fn into_params(self) -> Self::Params;
}

/// Shared episode loop: instance drawn uniformly per episode, Budget-mode episodes,
/// epsilon-greedy behaviour, one learning call per environment step.
pub(crate) fn run<L: Learner>(
    mut learner: L,
    instances: &[Instance],
    config: &TrainConfig,
    label: &str,
) -> Result<TrainOutput<L::Params>> {
    let mut rng = seed::rng(seed::derive(config.seed, label));
    let mut log = Vec::new();
    let mut status = TrainStatus::Completed;
    let mut step = 0;
    while step < config.total_steps && status == TrainStatus::Completed {
        let inst = &instances[rng.random_range(0..instances.len())];
        let mut env = PlacementEnv::reset(inst, EpisodeConfig::Budget { budget: config.budget })?;
        let mut losses = Vec::new();
        let mut steps = 0;
        while !env.is_done() && step < config.total_steps {
            let action = match learner.act(env.state(), config.epsilon, &mut rng) {
                Ok(a) => a,
                Err(Error::Diverged(reason)) => {
                    status = TrainStatus::Diverged { step, reason };
                    break;
                }
                Err(e) => return Err(e),
            };
            learner.observe(env.step(action)?);
            step += 1;
            steps += 1;
            match learner.learn(step, &mut rng) {
                Ok(Some(loss)) => losses.push(loss),
                Ok(None) => {}
                Err(reason) => {
                    status = TrainStatus::Diverged { step, reason };
                    break;
                }
            }
        }
        let delta = &env.selection().solution.delta;
        log.push(EpisodeLog {
            episode: log.len(),
            steps,
            terminal_mg: env.selection().value(),
            terminal_rmsg: rms_gap(delta)?,
            mean_loss: (!losses.is_empty())
                .then(|| losses.iter().sum::<f64>() / losses.len() as f64),
            epsilon: config.epsilon,
        });
    }
    Ok(TrainOutput {
        params: learner.into_params(),
        log,
        status,
    })
}
