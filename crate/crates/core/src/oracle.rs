//! Set-selection oracles over `f(S)`, the minimax gap achievable with actuator set `S`.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{solve_minimax_gap, SubproblemSolution};
use crate::model::Instance;

/// Upper limit on the number of subsets [`exhaustive_select`] will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;

/// Selected positions in selection order, with the cached solve of that set.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState {
    pub selected: Vec<usize>,
    pub solution: SubproblemSolution,
}

impl SelectionState {
    pub fn empty(inst: &Instance) -> Result<Self> {
        Self::solve(inst, Vec::new())
    }

    pub fn solve(inst: &Instance, selected: Vec<usize>) -> Result<Self> {
        let solution = solve_minimax_gap(inst, &selected)?;
        Ok(Self { selected, solution })
    }

    /// `f(S)` for the cached set.
    pub fn value(&self) -> f64 {
        self.solution.d
    }

    pub fn contains(&self, e: usize) -> bool {
        self.selected.contains(&e)
    }

    pub fn with(&self, inst: &Instance, e: usize) -> Result<Self> {
        inst.check_position(e)?;
        if self.contains(e) {
            return Err(Error::DuplicateSelection(e));
        }
        let mut selected = self.selected.clone();
        selected.push(e);
        Self::solve(inst, selected)
    }
}

/// `f(S_t) - f(S_t + {e})`.
pub fn marginal_gain(inst: &Instance, state: &SelectionState, e: usize) -> Result<f64> {
    let next = state.with(inst, e)?;
    Ok(state.value() - next.value())
}

/// Marginal gain of every candidate; already-selected positions get `None`.
pub fn candidate_gains(inst: &Instance, state: &SelectionState) -> Result<Vec<Option<f64>>> {
    (0..inst.m())
        .into_par_iter()
        .map(|e| {
            if state.contains(e) {
                Ok(None)
            } else {
                marginal_gain(inst, state, e).map(Some)
            }
        })
        .collect()
}

/// Index of the largest score among `Some` entries; ties go to the lowest index.
pub(crate) fn argmax_available(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (e, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.map_or(true, |(_, b)| s > b) {
                best = Some((e, s));
            }
        }
    }
    best.map(|(e, _)| e)
}

/// Every intermediate state of the greedy trajectory, `S_0 = {}` through `S_budget`.
pub fn greedy_path(inst: &Instance, budget: usize) -> Result<Vec<SelectionState>> {
    if budget > inst.m() {
        return Err(Error::InvalidBudget {
            budget,
            m: inst.m(),
        });
    }
    let mut path = vec![SelectionState::empty(inst)?];
    for _ in 0..budget {
        let current = path.last().expect("path starts non-empty");
        let gains = candidate_gains(inst, current)?;
        let e = argmax_available(&gains).ok_or(Error::NoAction)?;
        let next = current.with(inst, e)?;
        path.push(next);
    }
    Ok(path)
}

/// Adds the candidate with the largest marginal gain, `budget` times.
pub fn greedy_select(inst: &Instance, budget: usize) -> Result<SelectionState> {
    if budget == 0 {
        return Err(Error::InvalidBudget {
            budget,
            m: inst.m(),
        });
    }
    Ok(greedy_path(inst, budget)?.pop().expect("non-empty path"))
}

pub fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    (0..k).fold(1u128, |acc, i| acc * (m - i) as u128 / (i + 1) as u128)
}

/// Best subset of size at most `budget`, found by enumerating all subsets of size exactly
/// `budget` (monotonicity of `f` makes that sufficient). Ties go to the lexicographically first
/// subset.
pub fn exhaustive_select(inst: &Instance, budget: usize) -> Result<SelectionState> {
    let m = inst.m();
    if budget > m {
        return Err(Error::InvalidBudget { budget, m });
    }
    let count = binomial(m, budget);
    if count > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            m,
            budget,
            count,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if budget == 0 {
        return SelectionState::empty(inst);
    }
    let subsets: Vec<Vec<usize>> = (0..m).combinations(budget).collect();
    let values: Vec<f64> = subsets
        .par_iter()
        .map(|s| solve_minimax_gap(inst, s).map(|sol| sol.d))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    SelectionState::solve(inst, subsets[best].clone())
}
