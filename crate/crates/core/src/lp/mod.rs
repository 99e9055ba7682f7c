//! Linear programming: a generic dense simplex and the minimax-gap subproblem.

pub mod minimax;
pub mod simplex;

pub use minimax::{solve_minimax_gap, SubproblemSolution};
pub use simplex::{simplex_solve, LinearProgram, LpSolution, LpStatus, SimplexOptions};
