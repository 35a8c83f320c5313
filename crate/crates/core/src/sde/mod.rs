//! Closed-loop opinion dynamics: Euler–Maruyama paths, the stacked linear
//! system in closed form, and the pairwise opinion-gap bound.

mod gap;
mod linear;
mod noise;
mod simulate;

pub use gap::{opinion_gap_bound_check, BoundReport};
pub use linear::{closed_form_linear, exp_and_integral, matrix_exp, simulate_linear_em, ClosedFormVariant};
pub use noise::{substream, NoisePaths, TimeGrid};
pub use simulate::{
    simulate_followers, simulate_full_consensus, simulate_general, simulate_leader, ControlPolicy,
    EquilibriumFeedback, FeedbackAgent, FnControl, OpinionPath, ZeroControl,
};
