//! Training loops and policy evaluation.
//!
//! Both learners act through [`ActionScorer`]: the dueling Q-network scores every candidate
//! with `Q(s, e)`, the reward estimator with its predicted one-step reward. Behaviour is
//! epsilon-greedy over unmasked candidates; evaluation is the same with `epsilon = 0`.

mod config;
mod d3qn;
mod eval;
mod policy;
mod replay;
mod runner;
mod rees;

pub use config::TrainConfig;
pub use d3qn::train_d3qn;
pub use eval::{evaluate_policy, EpisodeResult, EvalReport, Policy};
pub use policy::{double_q_target, masked_argmax, select_action, ActionScorer};
pub use replay::ReplayBuffer;
pub use rees::train_rees;

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub steps: usize,
    pub terminal_mg: f64,
    pub terminal_rmsg: f64,
    /// Mean minibatch loss over the episode's updates; `None` before warmup ends.
    pub mean_loss: Option<f64>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainStatus {
    Completed,
    /// A non-finite loss, gradient or parameter appeared at `step`; the returned parameters are
    /// the last finite ones.
    Diverged { step: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct TrainOutput<P> {
    pub params: P,
    pub log: Vec<EpisodeLog>,
    pub status: TrainStatus,
}
