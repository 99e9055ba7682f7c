//! Sequential actuator placement for compliant-structure shape control.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: problem data (deviation, displacement matrix, force bounds) and gap metrics.
//! - [`lp`]: a dense two-phase simplex solver and the minimax-gap subproblem built on it.
//! - [`oracle`]: marginal gains, greedy selection and exhaustive enumeration.
//! - [`env`]: the sequential selection environment (projection state encoding, rewards,
//!   budget and spec-limit termination).
//! - [`nn`]: dense networks with hand-written backpropagation, the dueling Q-network and the
//!   reward-estimation network, optimizers and checkpoints.
//! - [`agent`]: replay buffer, epsilon-greedy selection, double-Q training, the
//!   reward-estimation baseline and policy evaluation.
//! - [`gen`]: synthetic instance families and dataset files.
//! - [`cli`]: the `sapo` command-line front end.

pub mod agent;
pub mod cli;
pub mod env;
pub mod error;
pub mod gen;
pub mod lp;
pub mod model;
pub mod nn;
pub mod oracle;
pub mod seed;
pub mod stats;

pub use error::{Error, Result};
pub use model::{compute_gap, max_gap, rms_gap, ForceVector, GapVector, Instance};
