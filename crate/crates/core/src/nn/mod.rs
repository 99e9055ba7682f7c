//! Dense networks with hand-written backpropagation.
//!
//! - [`QNetwork`]: a dueling Q-network. A shared encoder maps each input row
//!   `[u_o,norm(e) | psi_o,norm]` to a hidden code; an advantage head scores every row, and a
//!   value head scores the mean-pooled code. `Q(s, e) = V(s) + A(s, e) - mean_e' A(s, e')`.
//! - [`RewardNet`]: a plain feedforward regressor over single rows, predicting the per-step
//!   reward of choosing that candidate.

mod checkpoint;
mod dense;
mod input;
mod optim;
mod qnet;
mod reward_net;

pub use checkpoint::{Checkpoint, NetworkParams, CHECKPOINT_VERSION};
pub use dense::{Dense, Mlp, MlpTrace};
pub use input::{build_input, NetworkInput};
pub use optim::{Optimizer, OptimizerKind};
pub use qnet::{QNetConfig, QNetwork, QTrace};
pub use reward_net::{RewardNet, RewardNetConfig};

/// Uniform access to every trainable parameter as a list of flat slices, in a fixed order.
/// Gradients use the same type as the parameters they belong to.
pub trait Parameters: Clone {
    fn slices(&self) -> Vec<&[f64]>;
    fn slices_mut(&mut self) -> Vec<&mut [f64]>;

    fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.slices_mut().into_iter().for_each(|s| s.fill(0.0));
        z
    }

    fn add_assign(&mut self, other: &Self) {
        for (dst, src) in self.slices_mut().into_iter().zip(other.slices()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    fn scale(&mut self, k: f64) {
        self.slices_mut()
            .into_iter()
            .for_each(|s| s.iter_mut().for_each(|v| *v *= k));
    }

    fn all_finite(&self) -> bool {
        self.slices()
            .into_iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }

    fn param_count(&self) -> usize {
        self.slices().into_iter().map(<[f64]>::len).sum()
    }
}
