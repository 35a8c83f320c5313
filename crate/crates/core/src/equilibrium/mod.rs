//! Feedback Nash controls and optimal opinions for the three game regimes.

pub mod cubic;
mod fixed_point;
mod regime;
mod solver;

pub use cubic::{solve_cubic_real, solve_reduced_real, CubicPoly, RootBranch, RootSet, ROOT_RESIDUAL_TOL};
pub use fixed_point::{mean_field_fixed_point, AgentSpec, FixedPointOptions, FixedPointReport};
pub use regime::{DriftSign, Frame, Game, GameRegime, GameState};
pub use solver::{
    control_collectors, control_cubic, f_derivatives, feedback_control, opinion_collectors, opinion_cubic,
    opinion_residual, optimal_opinion, solve_control, solve_opinion, stationarity_residual, ControlCollectors,
    ControlSolution, DerivBundle, OpinionCollectors, OpinionSolution, STATIONARITY_TOL,
};
