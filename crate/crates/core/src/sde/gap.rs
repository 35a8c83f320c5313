use serde::{Deserialize, Serialize};

use super::noise::NoisePaths;
use super::simulate::OpinionPath;
use crate::equilibrium::Game;
use crate::error::{Error, Result};

/// Floating-point allowance on the bound, relative to its right-hand side.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `max_k |x_i(s_k) - x_j(s_k)|`
    pub max_lhs: f64,
    /// Bound with every integral taken over the whole horizon.
    pub rhs: f64,
    pub holds: bool,
    /// Smallest `rhs(s_k) - |dx(s_k)|` with integrals running up to `s_k`.
    pub running_margin: f64,
    pub holds_running: bool,
}

/// Checks `|dx(s)| <= |dx0| + |int (rate dx - du) ds| + sqrt(2 sigma) |int (dB_i - dB_j)|`
/// on a simulated pair, with integrals discretized on the simulation grid.
pub fn opinion_gap_bound_check(
    path: &OpinionPath,
    i: usize,
    j: usize,
    game: &Game,
    mean_opt: f64,
    noise: &NoisePaths,
) -> Result<BoundReport> {
    let grid = path.grid;
    if noise.grid != grid {
        return Err(Error::GridMismatch("noise and path grids differ".into()));
    }
    if i >= path.agents() || j >= path.agents() || i >= noise.dims() || j >= noise.dims() {
        return Err(Error::DimensionMismatch {
            block: "agent pair",
            expected: format!("< {}", path.agents().min(noise.dims())),
            got: format!("({i}, {j})"),
        });
    }
    let dt = grid.dt();
    let (xi, xj) = (&path.opinions[i], &path.opinions[j]);
    let (ui, uj) = (&path.controls[i], &path.controls[j]);
    let dx0 = (xi[0] - xj[0]).abs();

    let mut drift_int = 0.0f64;
    let mut noise_int = 0.0f64;
    let mut sigma = 0.0;
    let mut max_lhs = 0.0f64;
    let mut running_margin = f64::INFINITY;
    let mut holds_running = true;
    for k in 0..=grid.steps {
        let lhs = (xi[k] - xj[k]).abs();
        max_lhs = max_lhs.max(lhs);
        let fr = game.regime.frame(grid.point(k), mean_opt, game.horizon)?;
        sigma = fr.sigma;
        let rhs_k = dx0 + drift_int.abs() + (2.0 * sigma).sqrt() * noise_int.abs();
        running_margin = running_margin.min(rhs_k - lhs);
        if lhs > rhs_k * (1.0 + ROUNDING_SLACK) + f64::MIN_POSITIVE {
            holds_running = false;
        }
        if k < grid.steps {
            drift_int += (fr.beta * (xi[k] - xj[k]) - (ui[k] - uj[k])) * dt;
            noise_int += noise.increments[i][k] - noise.increments[j][k];
        }
    }
    let rhs = dx0 + drift_int.abs() + (2.0 * sigma).sqrt() * noise_int.abs();
    Ok(BoundReport {
        max_lhs,
        rhs,
        holds: max_lhs <= rhs * (1.0 + ROUNDING_SLACK) + f64::MIN_POSITIVE,
        running_margin,
        holds_running,
    })
}
