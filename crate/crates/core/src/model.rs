//! Problem data and gap metrics.
//!
//! An [`Instance`] describes one shape-control problem: the initial deviation `psi` at `n`
//! measurement coordinates, the `n x m` displacement matrix whose column `j` is the response to a
//! unit force at candidate position `j`, and per-position force bounds. The gap after applying
//! forces `F` on a subset `S` of positions is `psi + U_S F_S`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    psi: DVector<f64>,
    u: DMatrix<f64>,
    f_lower: DVector<f64>,
    f_upper: DVector<f64>,
}

impl Instance {
    /// Validates shapes, zero-straddling bounds and nonzero displacement columns.
    pub fn new(
        psi: DVector<f64>,
        u: DMatrix<f64>,
        f_lower: DVector<f64>,
        f_upper: DVector<f64>,
    ) -> Result<Self> {
        let (n, m) = u.shape();
        if n == 0 || m == 0 {
            return Err(Error::InvalidInstance(format!(
                "displacement matrix must be non-empty, got {n}x{m}"
            )));
        }
        if psi.len() != n {
            return Err(Error::InvalidInstance(format!(
                "psi has length {} but U has {n} rows",
                psi.len()
            )));
        }
        if f_lower.len() != m || f_upper.len() != m {
            return Err(Error::InvalidInstance(format!(
                "force bounds have lengths {}/{} but U has {m} columns",
                f_lower.len(),
                f_upper.len()
            )));
        }
        if psi.iter().chain(u.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance("non-finite psi or U entry".into()));
        }
        for j in 0..m {
            let (lo, hi) = (f_lower[j], f_upper[j]);
            if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && 0.0 <= hi) {
                return Err(Error::InvalidInstance(format!(
                    "bounds [{lo}, {hi}] at position {j} must be finite and straddle zero"
                )));
            }
            if u.column(j).iter().all(|&v| v == 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "displacement column {j} is all zero"
                )));
            }
        }
        Ok(Self {
            psi,
            u,
            f_lower,
            f_upper,
        })
    }

    /// Number of measurement coordinates.
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    /// Number of candidate actuator positions.
    pub fn m(&self) -> usize {
        self.u.ncols()
    }

    pub fn psi(&self) -> &DVector<f64> {
        &self.psi
    }

    pub fn displacement(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn f_lower(&self) -> &DVector<f64> {
        &self.f_lower
    }

    pub fn f_upper(&self) -> &DVector<f64> {
        &self.f_upper
    }

    pub fn check_position(&self, position: usize) -> Result<()> {
        if position < self.m() {
            Ok(())
        } else {
            Err(Error::InvalidPosition {
                position,
                m: self.m(),
            })
        }
    }

    /// Copy of this instance with `psi` and `U` replaced; bounds are kept.
    pub fn with_data(&self, psi: DVector<f64>, u: DMatrix<f64>) -> Result<Self> {
        Self::new(psi, u, self.f_lower.clone(), self.f_upper.clone())
    }
}

/// Forces applied at a subset of candidate positions, in the order the positions are listed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForceVector {
    pub positions: Vec<usize>,
    pub values: Vec<f64>,
}

impl ForceVector {
    pub fn new(positions: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(positions.len(), values.len(), "positions/values length mismatch");
        Self { positions, values }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.positions.iter().copied().zip(self.values.iter().copied())
    }
}

/// Post-adjustment gap `psi + U_S F_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapVector(pub DVector<f64>);

impl GapVector {
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.norm()
    }
}

pub fn compute_gap(inst: &Instance, forces: &ForceVector) -> Result<GapVector> {
    let mut delta = inst.psi.clone();
    for (j, value) in forces.iter() {
        inst.check_position(j)?;
        let (lower, upper) = (inst.f_lower[j], inst.f_upper[j]);
        if !(lower <= value && value <= upper) {
            return Err(Error::InfeasibleForce {
                position: j,
                value,
                lower,
                upper,
            });
        }
        delta.axpy(value, &inst.u.column(j), 1.0);
    }
    Ok(GapVector(delta))
}

/// Maximum absolute gap (the L-infinity norm).
pub fn max_gap(delta: &GapVector) -> Result<f64> {
    if delta.is_empty() {
        return Err(Error::Degenerate("max_gap of an empty gap vector"));
    }
    Ok(delta.0.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

/// Root-mean-square gap, `sqrt(mean(delta_i^2))`.
pub fn rms_gap(delta: &GapVector) -> Result<f64> {
    if delta.is_empty() {
        return Err(Error::Degenerate("rms_gap of an empty gap vector"));
    }
    let sum_sq: f64 = delta.0.iter().map(|v| v * v).sum();
    Ok((sum_sq / delta.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gap(values: &[f64]) -> GapVector {
        GapVector(DVector::from_column_slice(values))
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Instance {
        let psi = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let u = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        Instance::new(psi, u, DVector::repeat(m, -3.0), DVector::repeat(m, 3.0)).unwrap()
    }

    #[test]
    fn empty_forces_leave_psi_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = random_instance(&mut rng, 4, 3);
        let delta = compute_gap(&inst, &ForceVector::empty()).unwrap();
        assert_eq!(&delta.0, inst.psi());
    }

    #[test]
    fn exact_cancellation() {
        let inst = Instance::new(
            DVector::from_vec(vec![1.0, 1.0]),
            DMatrix::from_vec(2, 1, vec![1.0, 1.0]),
            DVector::from_vec(vec![-10.0]),
            DVector::from_vec(vec![10.0]),
        )
        .unwrap();
        let delta = compute_gap(&inst, &ForceVector::new(vec![0], vec![-1.0])).unwrap();
        assert_eq!(delta.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn compute_gap_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let inst = random_instance(&mut rng, 5, 3);
            let forces = ForceVector::new(
                vec![2, 0],
                vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)],
            );
            let delta = compute_gap(&inst, &forces).unwrap();
            for i in 0..5 {
                let mut expected = inst.psi()[i];
                for (j, f) in forces.iter() {
                    expected += inst.displacement()[(i, j)] * f;
                }
                assert!((delta.0[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn compute_gap_rejects_bad_positions_and_forces() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance(&mut rng, 3, 2);
        assert!(matches!(
            compute_gap(&inst, &ForceVector::new(vec![5], vec![0.0])),
            Err(Error::InvalidPosition { position: 5, .. })
        ));
        assert!(matches!(
            compute_gap(&inst, &ForceVector::new(vec![1], vec![3.5])),
            Err(Error::InfeasibleForce { position: 1, .. })
        ));
    }

    #[test]
    fn instance_invariants_enforced() {
        let psi = DVector::from_vec(vec![1.0, 2.0]);
        let u = DMatrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        let lo = DVector::repeat(2, -1.0);
        let hi = DVector::repeat(2, 1.0);
        assert!(Instance::new(psi.clone(), u, lo.clone(), hi.clone()).is_err());

        let u = DMatrix::identity(2, 2);
        assert!(Instance::new(psi.clone(), u.clone(), DVector::repeat(2, 0.5), hi.clone()).is_err());
        assert!(Instance::new(DVector::zeros(3), u.clone(), lo.clone(), hi.clone()).is_err());
        assert!(Instance::new(psi, u, lo, hi).is_ok());
    }

    #[test]
    fn metric_examples() {
        assert_eq!(max_gap(&gap(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_eq!(max_gap(&gap(&[1.0, -3.0, 2.0])).unwrap(), 3.0);
        assert_eq!(rms_gap(&gap(&[0.0, 0.0])).unwrap(), 0.0);
        assert!((rms_gap(&gap(&[3.0, 4.0])).unwrap() - 12.5_f64.sqrt()).abs() < 1e-15);
        assert!(max_gap(&gap(&[])).is_err());
        assert!(rms_gap(&gap(&[])).is_err());
    }

    #[test]
    fn metrics_match_scan_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let values: Vec<f64> = (0..20).map(|_| rng.random_range(-5.0..5.0)).collect();
            let mut scan = 0.0;
            for v in &values {
                if v.abs() > scan {
                    scan = v.abs();
                }
            }
            assert_eq!(max_gap(&gap(&values)).unwrap(), scan);

            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
            let two_pass = (var + mean * mean).sqrt();
            assert!((rms_gap(&gap(&values)).unwrap() - two_pass).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn norm_ordering_and_symmetry(values in prop::collection::vec(-100.0f64..100.0, 1..40)) {
            let d = gap(&values);
            let neg = GapVector(-d.0.clone());
            let mg = max_gap(&d).unwrap();
            let rg = rms_gap(&d).unwrap();
            prop_assert!(mg >= rg - 1e-12);
            prop_assert!(rg >= 0.0);
            prop_assert_eq!(max_gap(&neg).unwrap(), mg);
            prop_assert_eq!(rms_gap(&neg).unwrap(), rg);
        }

        #[test]
        fn compute_gap_is_linear(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(&mut rng, 6, 4);
            let positions = vec![0, 1, 3];
            let f1: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let f2: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let sum: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
            let g1 = compute_gap(&inst, &ForceVector::new(positions.clone(), f1)).unwrap().0 - inst.psi();
            let g2 = compute_gap(&inst, &ForceVector::new(positions.clone(), f2)).unwrap().0 - inst.psi();
            let g12 = compute_gap(&inst, &ForceVector::new(positions, sum)).unwrap().0 - inst.psi();
            prop_assert!((g12 - (g1 + g2)).amax() < 1e-12);
        }
    }
}
