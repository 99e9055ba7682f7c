use crate::error::{Error, Result};
use crate::lp::simplex::{simplex_solve, LinearProgram, LpStatus, SimplexOptions};
use crate::model::{compute_gap, max_gap, ForceVector, GapVector, Instance};

/// Optimal forces for a fixed actuator set and the resulting gap.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    /// Minimised maximum gap `f(S)`; always equal to `max_gap(delta)`.
    pub d: f64,
    pub forces: ForceVector,
    pub delta: GapVector,
}

/// Minimises `max_i |psi + U_S F_S|_i` over box-bounded forces on the positions in `selected`.
///
/// The LP is encoded with split forces `F = F+ - F-` and `d = D - e`, where `D = max|psi| + 1`
/// bounds `d` from above. At `F+ = F- = e = 0` every row has a strictly positive right-hand side,
/// so the slack basis is feasible and phase one is never needed. The reported `d` is recomputed
/// from the returned forces.
pub fn solve_minimax_gap(inst: &Instance, selected: &[usize]) -> Result<SubproblemSolution> {
    let baseline = GapVector(inst.psi().clone());
    let baseline_d = max_gap(&baseline)?;
    for (i, &j) in selected.iter().enumerate() {
        inst.check_position(j)?;
        if selected[..i].contains(&j) {
            return Err(Error::DuplicateSelection(j));
        }
    }
    if selected.is_empty() {
        return Ok(SubproblemSolution {
            d: baseline_d,
            forces: ForceVector::empty(),
            delta: baseline,
        });
    }

    let n = inst.n();
    let k = selected.len();
    let big_d = baseline_d + 1.0;
    let u = inst.displacement();
    let psi = inst.psi();

    let nv = 2 * k + 1;
    let mut rows = Vec::with_capacity(2 * n);
    let mut rhs = Vec::with_capacity(2 * n);
    for i in 0..n {
        // -U F - d <= psi   ->  -U F+ + U F- + e <= psi + D
        let mut lo_row = vec![0.0; nv];
        // U F - d <= -psi   ->   U F+ - U F- + e <= -psi + D
        let mut hi_row = vec![0.0; nv];
        for (c, &j) in selected.iter().enumerate() {
            let a = u[(i, j)];
            lo_row[c] = -a;
            lo_row[k + c] = a;
            hi_row[c] = a;
            hi_row[k + c] = -a;
        }
        lo_row[2 * k] = 1.0;
        hi_row[2 * k] = 1.0;
        rows.push(lo_row);
        rhs.push(psi[i] + big_d);
        rows.push(hi_row);
        rhs.push(-psi[i] + big_d);
    }
    let mut upper = Vec::with_capacity(nv);
    upper.extend(selected.iter().map(|&j| inst.f_upper()[j]));
    upper.extend(selected.iter().map(|&j| -inst.f_lower()[j]));
    upper.push(big_d);
    let mut cost = vec![0.0; nv];
    cost[2 * k] = -1.0;

    let lp = LinearProgram {
        cost,
        rows,
        rhs,
        lower: vec![0.0; nv],
        upper,
    };
    let sol = simplex_solve(&lp, &SimplexOptions::default())?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::LpInfeasible),
        status => {
            return Err(Error::NumericalFailure(format!(
                "simplex ended with {status:?} after {} iterations",
                sol.iterations
            )))
        }
    }

    let values: Vec<f64> = selected
        .iter()
        .enumerate()
        .map(|(c, &j)| (sol.x[c] - sol.x[k + c]).clamp(inst.f_lower()[j], inst.f_upper()[j]))
        .collect();
    let forces = ForceVector::new(selected.to_vec(), values);
    let delta = compute_gap(inst, &forces)?;
    let d = max_gap(&delta)?;
    if d > baseline_d {
        // Round-off pushed the basic solution past the zero-force baseline.
        let zero = ForceVector::new(selected.to_vec(), vec![0.0; k]);
        return Ok(SubproblemSolution {
            d: baseline_d,
            delta: compute_gap(inst, &zero)?,
            forces: zero,
        });
    }
    Ok(SubproblemSolution { d, forces, delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst(psi: &[f64], cols: &[&[f64]], bound: f64) -> Instance {
        let n = psi.len();
        let m = cols.len();
        let u = DMatrix::from_fn(n, m, |i, j| cols[j][i]);
        Instance::new(
            DVector::from_column_slice(psi),
            u,
            DVector::repeat(m, -bound),
            DVector::repeat(m, bound),
        )
        .unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, bound: f64) -> Instance {
        let psi = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let u = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        Instance::new(psi, u, DVector::repeat(m, -bound), DVector::repeat(m, bound)).unwrap()
    }

    #[test]
    fn empty_set_is_baseline() {
        let i = inst(&[1.0, -3.0, 2.0], &[&[1.0, 0.0, 0.0]], 1.0);
        let sol = solve_minimax_gap(&i, &[]).unwrap();
        assert_eq!(sol.d, 3.0);
        assert_eq!(sol.delta.as_slice(), &[1.0, -3.0, 2.0]);
        assert!(sol.forces.is_empty());
    }

    #[test]
    fn symmetric_case_keeps_zero_force() {
        let i = inst(&[1.0, -1.0], &[&[1.0, 1.0]], 10.0);
        let sol = solve_minimax_gap(&i, &[0]).unwrap();
        assert!((sol.d - 1.0).abs() < 1e-9);
        assert!(sol.forces.values[0].abs() < 1e-9);
    }

    #[test]
    fn exact_cancellation() {
        let i = inst(&[1.0, 1.0], &[&[1.0, 1.0]], 10.0);
        let sol = solve_minimax_gap(&i, &[0]).unwrap();
        assert!(sol.d.abs() < 1e-9);
        assert!((sol.forces.values[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn bound_limits_cancellation() {
        let i = inst(&[4.0, 4.0], &[&[1.0, 1.0]], 1.5);
        let sol = solve_minimax_gap(&i, &[0]).unwrap();
        assert!((sol.d - 2.5).abs() < 1e-9);
        assert!((sol.forces.values[0] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_duplicates_and_bad_positions() {
        let i = inst(&[1.0, 1.0], &[&[1.0, 1.0], &[1.0, 0.0]], 1.0);
        assert!(matches!(
            solve_minimax_gap(&i, &[0, 0]),
            Err(Error::DuplicateSelection(0))
        ));
        assert!(matches!(
            solve_minimax_gap(&i, &[2]),
            Err(Error::InvalidPosition { .. })
        ));
    }

    #[test]
    fn one_dimensional_matches_dense_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let i = random_instance(&mut rng, 6, 2, 2.0);
            let sol = solve_minimax_gap(&i, &[1]).unwrap();
            let mut best = f64::INFINITY;
            for step in 0..=40_000 {
                let f = -2.0 + 4.0 * step as f64 / 40_000.0;
                let mg = (0..6)
                    .map(|r| (i.psi()[r] + i.displacement()[(r, 1)] * f).abs())
                    .fold(0.0, f64::max);
                best = best.min(mg);
            }
            assert!(sol.d <= best + 1e-9);
            assert!(best - sol.d <= 1e-4 * 2.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn monotone_in_the_selected_set(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = random_instance(&mut rng, 7, 5, 3.0);
            let small = solve_minimax_gap(&i, &[3, 1]).unwrap();
            let big = solve_minimax_gap(&i, &[3, 1, 4, 0]).unwrap();
            prop_assert!(big.d <= small.d + 1e-9);
            prop_assert!(small.d <= max_gap(&GapVector(i.psi().clone())).unwrap());
        }

        #[test]
        fn consistent_with_compute_gap(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = random_instance(&mut rng, 8, 4, 1.0);
            let sol = solve_minimax_gap(&i, &[2, 0, 3]).unwrap();
            let delta = compute_gap(&i, &sol.forces).unwrap();
            prop_assert!((max_gap(&delta).unwrap() - sol.d).abs() <= 1e-9);
        }

        #[test]
        fn scale_covariant(seed in any::<u64>(), alpha in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = random_instance(&mut rng, 6, 3, 0.7);
            let scaled = Instance::new(
                i.psi() * alpha,
                i.displacement().clone(),
                i.f_lower() * alpha,
                i.f_upper() * alpha,
            ).unwrap();
            let d = solve_minimax_gap(&i, &[0, 2]).unwrap().d;
            let ds = solve_minimax_gap(&scaled, &[0, 2]).unwrap().d;
            prop_assert!((ds - alpha * d).abs() <= 1e-9 * (1.0 + alpha));
        }
    }
}
