//! The sequential placement environment.
//!
//! At step `t` the agent sees the displacement columns and the deviation projected onto the
//! orthogonal complement of the span of the already-selected columns, L2-normalised, together
//! with a selection mask. Choosing an unselected position solves the minimax LP for the enlarged
//! set and yields reward `(f(S_t) - f(S_t+1)) / ||delta_S_t||_2`.

mod placement;
mod projection;
mod state;

pub use placement::{EpisodeConfig, PlacementEnv, Transition, ZERO_GAP_TOL};
pub use projection::{project_residuals, projected_single_value, Projection, DEPENDENCE_TOL};
pub use state::{encode_state, StateMatrix, ZERO_ROW_TOL};
