use rand::Rng;
use rayon::prelude::*;

use crate::agent::policy::{masked_argmax, ActionScorer};
use crate::env::{EpisodeConfig, PlacementEnv};
use crate::error::{Error, Result};
use crate::model::{rms_gap, ForceVector, Instance};
use crate::oracle::{argmax_available, candidate_gains};
use crate::seed;
use crate::stats::mean;

/// How actions are chosen during evaluation. Every policy is greedy (no exploration).
#[derive(Clone, Copy)]
pub enum Policy<'a> {
    /// Argmax of a learned scorer over unmasked candidates.
    Scorer(&'a (dyn ActionScorer + Sync)),
    /// Argmax of the true marginal gain, identical to the greedy oracle.
    GreedyOracle,
    /// Uniform over unmasked candidates; instance `i` uses its own stream derived from `seed`.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Positions in selection order.
    pub selected: Vec<usize>,
    pub forces: ForceVector,
    pub mg: f64,
    pub rmsg: f64,
}

impl EpisodeResult {
    pub fn count(&self) -> usize {
        self.selected.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub episodes: Vec<EpisodeResult>,
    pub mean_mg: f64,
    pub mean_rmsg: f64,
    pub mean_count: f64,
}

fn run_episode(
    policy: Policy<'_>,
    inst: &Instance,
    index: usize,
    config: EpisodeConfig,
) -> Result<EpisodeResult> {
    let mut env = PlacementEnv::reset(inst, config)?;
    let mut rng = match policy {
        Policy::Random { seed: s } => Some(seed::rng(seed::derive_indexed(s, "eval/random", index as u64))),
        _ => None,
    };
    while !env.is_done() {
        let action = match policy {
            Policy::Scorer(scorer) => {
                let scores = scorer.scores(env.state())?;
                masked_argmax(&scores, &env.state().mask())
            }
            Policy::GreedyOracle => argmax_available(&candidate_gains(inst, env.selection())?),
            Policy::Random { .. } => {
                let open: Vec<usize> = (0..inst.m()).filter(|&e| !env.selection().contains(e)).collect();
                let rng = rng.as_mut().expect("random policy has a stream");
                (!open.is_empty()).then(|| open[rng.random_range(0..open.len())])
            }
        }
        .ok_or(Error::NoAction)?;
        env.step(action)?;
    }
    let sel = env.selection();
    Ok(EpisodeResult {
        selected: sel.selected.clone(),
        forces: sel.solution.forces.clone(),
        mg: sel.value(),
        rmsg: rms_gap(&sel.solution.delta)?,
    })
}

/// Rolls one episode per instance (in parallel) and aggregates the terminal metrics.
pub fn evaluate_policy(
    policy: &Policy<'_>,
    instances: &[Instance],
    config: EpisodeConfig,
) -> Result<EvalReport> {
    if instances.is_empty() {
        return Err(Error::Config("no instances to evaluate".into()));
    }
    let policy = *policy;
    let episodes = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| run_episode(policy, inst, i, config))
        .collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&EpisodeResult) -> f64| mean(&episodes.iter().map(f).collect::<Vec<_>>());
    Ok(EvalReport {
        mean_mg: pick(|e| e.mg),
        mean_rmsg: pick(|e| e.rmsg),
        mean_count: pick(|e| e.count() as f64),
        episodes,
    })
}
