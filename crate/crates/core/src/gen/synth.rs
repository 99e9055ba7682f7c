use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    /// Symmetric force bound `B`: every actuator gets `[-B, B]`.
    pub force_bound: f64,
    /// Number of low-order harmonics `k` (harmonic 0 through `k - 1`).
    pub smoothness: usize,
    /// Relative perturbation applied to each harmonic coefficient of every column.
    pub noise_level: f64,
    /// `max|psi|` of the generated deviation.
    pub deviation_scale: f64,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        Self {
            n: 40,
            m: 12,
            force_bound: 5.0,
            smoothness: 6,
            noise_level: 0.05,
            deviation_scale: 1.0,
            seed: 0,
        }
    }
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Generation(msg));
        if self.n < 2 {
            return fail(format!("n must be at least 2, got {}", self.n));
        }
        if self.m < 1 {
            return fail("m must be at least 1".into());
        }
        if self.smoothness < 1 {
            return fail("smoothness must be at least 1".into());
        }
        // Harmonics up to k - 1 must stay below the Nyquist limit of n points.
        if 2 * (self.smoothness - 1) >= self.n {
            return fail(format!(
                "smoothness {} is too high for n = {} measurement points",
                self.smoothness, self.n
            ));
        }
        if !(self.force_bound > 0.0 && self.force_bound.is_finite()) {
            return fail(format!("force bound must be positive, got {}", self.force_bound));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return fail(format!("noise level must be non-negative, got {}", self.noise_level));
        }
        if !(self.deviation_scale >= 0.0 && self.deviation_scale.is_finite()) {
            return fail(format!(
                "deviation scale must be non-negative, got {}",
                self.deviation_scale
            ));
        }
        Ok(())
    }
}

fn taper(q: usize, k: usize) -> f64 {
    0.5 * (1.0 + (PI * q as f64 / k as f64).cos())
}

fn measurement_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect()
}

/// Like [`generate_instance`] but with explicit actuator angles (radians).
pub fn generate_with_angles<R: Rng + ?Sized>(
    spec: &GenSpec,
    actuator_angles: &[f64],
    rng: &mut R,
) -> Result<Instance> {
    spec.validate()?;
    if actuator_angles.len() != spec.m {
        return Err(Error::Generation(format!(
            "{} actuator angles given for m = {}",
            actuator_angles.len(),
            spec.m
        )));
    }
    let (n, m, k) = (spec.n, spec.m, spec.smoothness);
    let theta = measurement_angles(n);
    let weights: Vec<f64> = (0..k).map(|q| taper(q, k)).collect();
    let norm: f64 = weights.iter().sum();

    let mut u = DMatrix::zeros(n, m);
    for (j, &phi) in actuator_angles.iter().enumerate() {
        let coeffs: Vec<f64> = weights
            .iter()
            .map(|w| {
                let z: f64 = rng.sample(StandardNormal);
                w * (1.0 + spec.noise_level * z) / norm
            })
            .collect();
        for (i, &t) in theta.iter().enumerate() {
            u[(i, j)] = coeffs
                .iter()
                .enumerate()
                .map(|(q, c)| c * (q as f64 * (t - phi)).cos())
                .sum();
        }
        if u.column(j).amax() <= 1e-12 {
            return Err(Error::Generation(format!(
                "column {j} vanished; lower the noise level"
            )));
        }
    }

    let mut psi = DVector::zeros(n);
    if spec.deviation_scale > 0.0 {
        for (q, w) in weights.iter().enumerate() {
            let a: f64 = w * rng.sample::<f64, _>(StandardNormal);
            let b: f64 = w * rng.sample::<f64, _>(StandardNormal);
            for (i, &t) in theta.iter().enumerate() {
                let qt = q as f64 * t;
                psi[i] += a * qt.cos() + b * qt.sin();
            }
        }
        let peak = psi.amax();
        if peak <= 1e-12 {
            return Err(Error::Generation("deviation field vanished".into()));
        }
        psi *= spec.deviation_scale / peak;
    }

    let bound = DVector::repeat(m, spec.force_bound);
    Instance::new(psi, u, -bound.clone(), bound).map_err(|e| Error::Generation(e.to_string()))
}

/// One instance with actuators evenly spaced around the section.
pub fn generate_instance<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<Instance> {
    spec.validate()?;
    let angles: Vec<f64> = (0..spec.m)
        .map(|j| 2.0 * PI * j as f64 / spec.m as f64)
        .collect();
    generate_with_angles(spec, &angles, rng)
}

/// `count` instances; instance `i` draws from its own stream derived from `(spec.seed, label, i)`.
pub fn generate_dataset(spec: &GenSpec, label: &str, count: usize) -> Result<Vec<Instance>> {
    (0..count)
        .map(|i| {
            let mut rng = seed::rng(seed::derive_indexed(spec.seed, label, i as u64));
            generate_instance(spec, &mut rng)
        })
        .collect()
}
