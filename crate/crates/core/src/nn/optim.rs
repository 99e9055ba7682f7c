use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Parameters;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Plain gradient descent, `w <- w - lr * g`.
    Sgd { lr: f64 },
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl OptimizerKind {
    pub fn adam(lr: f64) -> Self {
        OptimizerKind::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl Default for OptimizerKind {
    fn default() -> Self {
        Self::adam(1e-3)
    }
}

/// First-order optimizer with constant learning rate. Moment buffers are created lazily to match
/// the parameter layout on the first step.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    t: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            t: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) -> Result<()> {
        if !grads.all_finite() {
            return Err(Error::NonFiniteGradient("optimizer input"));
        }
        match self.kind {
            OptimizerKind::Sgd { lr } => {
                for (p, g) in params.slices_mut().into_iter().zip(grads.slices()) {
                    for (w, d) in p.iter_mut().zip(g) {
                        *w -= lr * d;
                    }
                }
            }
            OptimizerKind::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                if self.first.is_empty() {
                    self.first = grads.slices().iter().map(|s| vec![0.0; s.len()]).collect();
                    self.second = self.first.clone();
                }
                self.t += 1;
                let c1 = 1.0 - beta1.powi(self.t as i32);
                let c2 = 1.0 - beta2.powi(self.t as i32);
                let layers = params.slices_mut().into_iter().zip(grads.slices());
                for ((p, g), (m, v)) in layers.zip(self.first.iter_mut().zip(self.second.iter_mut())) {
                    for i in 0..p.len() {
                        let gi = g[i];
                        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                        let m_hat = m[i] / c1;
                        let v_hat = v[i] / c2;
                        p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        if !params.all_finite() {
            return Err(Error::NonFiniteGradient("updated parameters"));
        }
        Ok(())
    }
}
