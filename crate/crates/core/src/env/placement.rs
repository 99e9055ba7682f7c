use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::state::{encode_state, StateMatrix};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::oracle::SelectionState;

/// A step from a state whose gap has L2 norm at or below this is already perfect: the reward is
/// zero and the episode ends.
pub const ZERO_GAP_TOL: f64 = 1e-12;

/// Episode termination rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EpisodeConfig {
    /// Stop once `budget` actuators are selected.
    Budget { budget: usize },
    /// Stop once the maximum gap drops strictly below `limit_mg`, or when every candidate is
    /// selected.
    SpecLimit { limit_mg: f64 },
}

impl EpisodeConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        match *self {
            EpisodeConfig::Budget { budget } if budget == 0 || budget > m => {
                Err(Error::InvalidBudget { budget, m })
            }
            EpisodeConfig::SpecLimit { limit_mg } if !(limit_mg > 0.0 && limit_mg.is_finite()) => {
                Err(Error::Config(format!("spec limit must be positive, got {limit_mg}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub state: Arc<StateMatrix>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Arc<StateMatrix>,
    pub done: bool,
}

/// One episode over one instance. Single-threaded; create one per concurrent episode.
#[derive(Debug, Clone)]
pub struct PlacementEnv<'a> {
    inst: &'a Instance,
    config: EpisodeConfig,
    selection: SelectionState,
    state: Arc<StateMatrix>,
    done: bool,
}

impl<'a> PlacementEnv<'a> {
    /// Starts an episode with nothing selected. In spec-limit mode the episode is already done
    /// if the initial maximum gap is below the limit.
    pub fn reset(inst: &'a Instance, config: EpisodeConfig) -> Result<Self> {
        config.validate(inst.m())?;
        let selection = SelectionState::empty(inst)?;
        let state = Arc::new(encode_state(inst, &selection));
        let done = match config {
            EpisodeConfig::Budget { .. } => false,
            EpisodeConfig::SpecLimit { limit_mg } => selection.value() < limit_mg,
        };
        Ok(Self {
            inst,
            config,
            selection,
            state,
            done,
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn config(&self) -> EpisodeConfig {
        self.config
    }

    pub fn state(&self) -> &Arc<StateMatrix> {
        &self.state
    }

    pub fn selection(&self) -> &SelectionState {
        &self.selection
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        self.inst.check_position(action)?;
        if self.selection.contains(action) {
            return Err(Error::InvalidAction(action));
        }
        let prev_state = Arc::clone(&self.state);
        let denom = self.selection.solution.delta.l2_norm();
        let next = self.selection.with(self.inst, action)?;
        let (reward, done) = if denom <= ZERO_GAP_TOL {
            (0.0, true)
        } else {
            let reward = (self.selection.value() - next.value()) / denom;
            let count = next.selected.len();
            let done = match self.config {
                EpisodeConfig::Budget { budget } => count >= budget,
                EpisodeConfig::SpecLimit { limit_mg } => {
                    next.value() < limit_mg || count == self.inst.m()
                }
            };
            (reward, done)
        };
        self.selection = next;
        self.state = Arc::new(encode_state(self.inst, &self.selection));
        self.done = done;
        Ok(Transition {
            state: prev_state,
            action,
            reward,
            next_state: Arc::clone(&self.state),
            done,
        })
    }
}
