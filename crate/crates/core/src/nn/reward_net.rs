use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::dense::{Mlp, MlpTrace};
use crate::nn::input::NetworkInput;
use crate::nn::Parameters;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardNetConfig {
    pub n: usize,
    pub m: usize,
    pub hidden_widths: Vec<usize>,
}

impl RewardNetConfig {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            hidden_widths: vec![64, 32],
        }
    }

    fn layout(&self) -> Vec<usize> {
        let mut w = vec![2 * self.n];
        w.extend(&self.hidden_widths);
        w.push(1);
        w
    }
}

/// Scalar regressor over one `[u_o,norm(e) | psi_o,norm]` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardNet {
    pub config: RewardNetConfig,
    pub mlp: Mlp,
}

impl RewardNet {
    pub fn new<R: Rng + ?Sized>(config: RewardNetConfig, rng: &mut R) -> Result<Self> {
        if config.n == 0 || config.m == 0 || config.hidden_widths.iter().any(|&w| w == 0) {
            return Err(Error::Config("reward net needs n, m >= 1 and positive widths".into()));
        }
        let mlp = Mlp::new(&config.layout(), false, rng);
        Ok(Self { config, mlp })
    }

    pub fn validate(&self) -> Result<()> {
        if self.mlp.layers.is_empty() {
            return Err(Error::Config("reward net has no layers".into()));
        }
        self.mlp.check_chain("reward net")?;
        let mut widths = vec![self.mlp.input_width()];
        widths.extend(self.mlp.layers.iter().map(|l| l.outputs));
        if widths != self.config.layout() {
            return Err(Error::Config(format!(
                "reward net widths {widths:?} do not match config {:?}",
                self.config.layout()
            )));
        }
        if !self.all_finite() {
            return Err(Error::Config("non-finite reward net parameter".into()));
        }
        Ok(())
    }

    fn check_row(&self, row: &[f64]) -> Result<()> {
        if row.len() != 2 * self.config.n {
            return Err(Error::Config(format!(
                "reward net expects rows of length {}, got {}",
                2 * self.config.n,
                row.len()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, row: &[f64]) -> Result<f64> {
        self.check_row(row)?;
        Ok(self.mlp.forward(row)[0])
    }

    pub fn forward_trace(&self, row: &[f64]) -> Result<MlpTrace> {
        self.check_row(row)?;
        Ok(self.mlp.forward_trace(row))
    }

    /// Predicted reward for every row of the input.
    pub fn forward_batch(&self, input: &NetworkInput) -> Result<Vec<f64>> {
        (0..input.rows()).map(|e| self.forward(input.row(e))).collect()
    }

    /// Accumulates the gradient of a loss with `d loss / d output = d_out`.
    pub fn backward(&self, trace: &MlpTrace, d_out: f64, grad: &mut RewardNet) {
        self.mlp.backward(trace, &[d_out], &mut grad.mlp, false);
    }
}

impl Parameters for RewardNet {
    fn slices(&self) -> Vec<&[f64]> {
        self.mlp.slices()
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.mlp.slices_mut()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_predict_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = RewardNet::new(RewardNetConfig::new(3, 2), &mut rng).unwrap().zeros_like();
        assert_eq!(net.forward(&[0.5; 6]).unwrap(), 0.0);
    }

    #[test]
    fn matches_hand_unrolled_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let config = RewardNetConfig {
            n: 2,
            m: 1,
            hidden_widths: vec![3],
        };
        let mut net = RewardNet::new(config, &mut rng).unwrap();
        for s in net.slices_mut() {
            s.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        }
        let x = [0.2, -0.7, 0.4, 0.9];
        let l0 = &net.mlp.layers[0];
        let l1 = &net.mlp.layers[1];
        let mut out = l1.bias[0];
        for k in 0..3 {
            let mut z = l0.bias[k];
            for i in 0..4 {
                z += l0.weights[k * 4 + i] * x[i];
            }
            out += l1.weights[k] * z.max(0.0);
        }
        assert!((net.forward(&x).unwrap() - out).abs() < 1e-12);
    }

    #[test]
    fn batch_equals_one_at_a_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = RewardNet::new(RewardNetConfig::new(4, 5), &mut rng).unwrap();
        let data: Vec<f64> = (0..5 * 8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let input = NetworkInput::from_rows(5, 8, data);
        let batch = net.forward_batch(&input).unwrap();
        for e in 0..5 {
            assert_eq!(batch[e], net.forward(input.row(e)).unwrap());
        }
        assert!(net.forward(&[0.0; 3]).is_err());
    }
}
