use rand::Rng;

use crate::env::{StateMatrix, Transition};
use crate::error::{Error, Result};
use crate::nn::{build_input, QNetwork, RewardNet};

/// Anything that assigns a score to every candidate of a state; higher is better.
pub trait ActionScorer {
    fn scores(&self, state: &StateMatrix) -> Result<Vec<f64>>;
}

impl ActionScorer for QNetwork {
    fn scores(&self, state: &StateMatrix) -> Result<Vec<f64>> {
        self.forward(&build_input(state))
    }
}

impl ActionScorer for RewardNet {
    fn scores(&self, state: &StateMatrix) -> Result<Vec<f64>> {
        self.forward_batch(&build_input(state))
    }
}

/// Largest value among unmasked positions, ties to the lowest index. NaN never wins.
pub fn masked_argmax(values: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (e, (&v, &masked)) in values.iter().zip(mask).enumerate() {
        if masked || v.is_nan() {
            continue;
        }
        if best.map_or(true, |(_, b)| v > b) {
            best = Some((e, v));
        }
    }
    best.map(|(e, _)| e)
}

fn random_unmasked<R: Rng + ?Sized>(mask: &[bool], rng: &mut R) -> Result<usize> {
    let open: Vec<usize> = (0..mask.len()).filter(|&e| !mask[e]).collect();
    if open.is_empty() {
        return Err(Error::NoAction);
    }
    Ok(open[rng.random_range(0..open.len())])
}

/// Epsilon-greedy choice over unmasked candidates. One uniform draw decides between exploring
/// and exploiting; the scorer is only queried when exploiting.
pub fn select_action<S, R>(scorer: &S, state: &StateMatrix, epsilon: f64, rng: &mut R) -> Result<usize>
where
    S: ActionScorer + ?Sized,
    R: Rng + ?Sized,
{
    let mask = state.mask();
    if mask.iter().all(|&m| m) {
        return Err(Error::NoAction);
    }
    if rng.random::<f64>() < epsilon {
        return random_unmasked(&mask, rng);
    }
    let scores = scorer.scores(state)?;
    if scores.iter().zip(&mask).any(|(s, &m)| !m && !s.is_finite()) {
        return Err(Error::Diverged("non-finite action score".into()));
    }
    masked_argmax(&scores, &mask).ok_or(Error::NoAction)
}

/// Double-Q target: the online scorer picks the next action, the target scorer values it.
/// Terminal transitions, and next states with nothing left to pick, bootstrap nothing.
pub fn double_q_target<S, T>(online: &S, target: &T, transition: &Transition, gamma: f64) -> Result<f64>
where
    S: ActionScorer + ?Sized,
    T: ActionScorer + ?Sized,
{
    if transition.done || gamma == 0.0 {
        return Ok(transition.reward);
    }
    let next = &transition.next_state;
    let mask = next.mask();
    let Some(a_star) = masked_argmax(&online.scores(next)?, &mask) else {
        return Ok(transition.reward);
    };
    Ok(transition.reward + gamma * target.scores(next)?[a_star])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{encode_state, EpisodeConfig, PlacementEnv};
    use crate::model::Instance;
    use crate::oracle::SelectionState;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    /// Fixed score table regardless of state.
    struct Table(Vec<f64>);

    impl ActionScorer for Table {
        fn scores(&self, _: &StateMatrix) -> Result<Vec<f64>> {
            Ok(self.0.clone())
        }
    }

    fn toy() -> Instance {
        Instance::new(
            DVector::from_vec(vec![1.0, -0.5, 0.25]),
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.5, 0.2, 0.3, 1.0]),
            DVector::repeat(3, -2.0),
            DVector::repeat(3, 2.0),
        )
        .unwrap()
    }

    fn state(inst: &Instance, selected: Vec<usize>) -> StateMatrix {
        encode_state(inst, &SelectionState::solve(inst, selected).unwrap())
    }

    #[test]
    fn greedy_picks_best_unmasked() {
        let inst = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s0 = state(&inst, vec![]);
        let s1 = state(&inst, vec![1]);
        let table = Table(vec![0.2, 0.9, 0.5]);
        assert_eq!(select_action(&table, &s0, 0.0, &mut rng).unwrap(), 1);
        assert_eq!(select_action(&table, &s1, 0.0, &mut rng).unwrap(), 2);
        assert_eq!(masked_argmax(&[1.0, 1.0, 0.0], &[false; 3]), Some(0));
        assert_eq!(masked_argmax(&[f64::NAN, 0.0], &[false; 2]), Some(1));
    }

    #[test]
    fn fully_masked_state_has_no_action() {
        let inst = toy();
        let s = state(&inst, vec![0, 1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for eps in [0.0, 1.0] {
            assert!(matches!(
                select_action(&Table(vec![0.0; 3]), &s, eps, &mut rng),
                Err(Error::NoAction)
            ));
        }
    }

    #[test]
    fn masked_position_never_chosen() {
        let inst = toy();
        let s = state(&inst, vec![1]);
        let table = Table(vec![0.0, 5.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for eps in [0.0, 0.3, 1.0] {
            for _ in 0..10_000 {
                assert_ne!(select_action(&table, &s, eps, &mut rng).unwrap(), 1);
            }
        }
    }

    #[test]
    fn full_exploration_is_uniform_over_unmasked() {
        let inst = toy();
        let s = state(&inst, vec![0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0u32; 3];
        let draws = 10_000;
        for _ in 0..draws {
            counts[select_action(&Table(vec![9.0, 0.0, 0.0]), &s, 1.0, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0], 0);
        // Chi-square with one degree of freedom; 10.83 is the 0.1% critical value.
        let expected = draws as f64 / 2.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    fn transition(inst: &Instance, done: bool, reward: f64) -> Transition {
        let mut env = PlacementEnv::reset(inst, EpisodeConfig::Budget { budget: 3 }).unwrap();
        let mut t = env.step(0).unwrap();
        t.done = done;
        t.reward = reward;
        t
    }

    #[test]
    fn terminal_and_undiscounted_targets() {
        let inst = toy();
        let online = Table(vec![1.0, 2.0, 3.0]);
        let target = Table(vec![10.0, 20.0, 30.0]);
        assert_eq!(double_q_target(&online, &target, &transition(&inst, true, 0.7), 1.0).unwrap(), 0.7);
        assert_eq!(double_q_target(&online, &target, &transition(&inst, false, 0.4), 0.0).unwrap(), 0.4);
    }

    #[test]
    fn online_selects_target_evaluates() {
        // Next state has position 0 selected. Online ranks 1 above 2, target ranks 2 above 1, so
        // the target's value of action 1 is used: 0.5 + 0.9 * (-1.0).
        let inst = toy();
        let online = Table(vec![100.0, 3.0, 2.0]);
        let target = Table(vec![50.0, -1.0, 4.0]);
        let y = double_q_target(&online, &target, &transition(&inst, false, 0.5), 0.9).unwrap();
        assert!((y - (0.5 - 0.9)).abs() < 1e-15);
    }

    #[test]
    fn exhausted_next_state_bootstraps_nothing() {
        let inst = toy();
        let full = Arc::new(state(&inst, vec![0, 1, 2]));
        let mut t = transition(&inst, false, 0.3);
        t.next_state = full;
        let y = double_q_target(&Table(vec![1.0; 3]), &Table(vec![1.0; 3]), &t, 1.0).unwrap();
        assert_eq!(y, 0.3);
    }
}
