use serde::{Deserialize, Serialize};

use super::noise::{NoisePaths, TimeGrid};
use crate::coefficients::MultiplierModel;
use crate::equilibrium::{feedback_control, Frame, Game, GameRegime, GameState};
use crate::error::{Error, Result};

/// Control law `u = phi(agent, s, x)` applied along a path.
pub trait ControlPolicy: Sync {
    fn control(&self, agent: usize, s: f64, x: f64) -> Result<f64>;
}

pub struct ZeroControl;

impl ControlPolicy for ZeroControl {
    fn control(&self, _: usize, _: f64, _: f64) -> Result<f64> {
        Ok(0.0)
    }
}

/// Wraps a closure as a policy.
pub struct FnControl<F>(pub F);

impl<F> ControlPolicy for FnControl<F>
where
    F: Fn(usize, f64, f64) -> f64 + Sync,
{
    fn control(&self, agent: usize, s: f64, x: f64) -> Result<f64> {
        Ok((self.0)(agent, s, x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackAgent {
    pub game: Game,
    pub x0: f64,
    pub multiplier: MultiplierModel,
    pub x_j: f64,
    pub mean_opt: f64,
}

/// Each agent plays its equilibrium feedback control at its current opinion.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumFeedback {
    pub agents: Vec<FeedbackAgent>,
}

impl ControlPolicy for EquilibriumFeedback {
    fn control(&self, agent: usize, s: f64, x: f64) -> Result<f64> {
        let a = self.agents.get(agent).ok_or_else(|| Error::DimensionMismatch {
            block: "feedback agents",
            expected: format!("> {agent}"),
            got: self.agents.len().to_string(),
        })?;
        let st = GameState::new(s, x, a.x_j, a.x0, a.mean_opt, 0.0, &a.multiplier)?;
        feedback_control(&a.game, &st)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionPath {
    pub grid: TimeGrid,
    pub regime: String,
    /// `opinions[agent][k]` at grid point `k`.
    pub opinions: Vec<Vec<f64>>,
    /// Control applied over `[s_k, s_{k+1})`; the last entry is evaluated at `t`.
    pub controls: Vec<Vec<f64>>,
    /// Brownian increment over `[s_k, s_{k+1})`.
    pub increments: Vec<Vec<f64>>,
    /// Grid points with an opinion outside `[0, 1]`.
    pub excursions: usize,
}

impl OpinionPath {
    pub fn agents(&self) -> usize {
        self.opinions.len()
    }

    pub fn final_opinions(&self) -> Vec<f64> {
        self.opinions.iter().map(|p| p[self.grid.steps]).collect()
    }
}

fn integrate<D, S>(
    regime: &str,
    x0: &[f64],
    grid: &TimeGrid,
    noise: &NoisePaths,
    policy: &dyn ControlPolicy,
    drift: D,
    diffusion: S,
) -> Result<OpinionPath>
where
    D: Fn(usize, usize, f64, f64) -> f64,
    S: Fn(usize, usize, f64, f64) -> f64,
{
    noise.check(x0.len(), grid)?;
    let dt = grid.dt();
    let mut opinions = Vec::with_capacity(x0.len());
    let mut controls = Vec::with_capacity(x0.len());
    let mut excursions = 0;
    for (i, &start) in x0.iter().enumerate() {
        let mut xs = Vec::with_capacity(grid.steps + 1);
        let mut us = Vec::with_capacity(grid.steps + 1);
        let mut x = start;
        for k in 0..=grid.steps {
            let s = grid.point(k);
            if !(0.0..=1.0).contains(&x) {
                excursions += 1;
            }
            let u = policy.control(i, s, x).map_err(|e| e.context(format!("control of agent {} at step {k}", i + 1)))?;
            xs.push(x);
            us.push(u);
            if k == grid.steps {
                break;
            }
            x += drift(i, k, x, u) * dt + diffusion(i, k, x, u) * noise.increments[i][k];
            if !x.is_finite() {
                return Err(Error::Divergence { step: k + 1, agent: i + 1 });
            }
        }
        opinions.push(xs);
        controls.push(us);
    }
    Ok(OpinionPath {
        grid: *grid,
        regime: regime.to_string(),
        opinions,
        controls,
        increments: noise.increments[..x0.len()].to_vec(),
        excursions,
    })
}

/// Euler–Maruyama for `dx = mu(s, x, u) ds + sigma(s, x, u) dB`, one scalar
/// equation per agent. Closures receive `(agent, s, x, u)`.
pub fn simulate_general<M, S>(
    mu: M,
    sigma: S,
    policy: &dyn ControlPolicy,
    x0: &[f64],
    grid: &TimeGrid,
    noise: &NoisePaths,
) -> Result<OpinionPath>
where
    M: Fn(usize, f64, f64, f64) -> f64,
    S: Fn(usize, f64, f64, f64) -> f64,
{
    integrate(
        "general",
        x0,
        grid,
        noise,
        policy,
        |i, k, x, u| mu(i, grid.point(k), x, u),
        |i, k, x, u| sigma(i, grid.point(k), x, u),
    )
}

fn frames(game: &Game, mean_opt: f64, grid: &TimeGrid) -> Result<Vec<Frame>> {
    if (game.horizon - grid.t).abs() > 1e-12 * grid.t.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "game horizon {} differs from grid horizon {}",
            game.horizon, grid.t
        )));
    }
    grid.points().map(|s| game.regime.frame(s, mean_opt, game.horizon)).collect()
}

fn simulate_frames(
    regime: &str,
    frames: &[Vec<Frame>],
    policy: &dyn ControlPolicy,
    x0: &[f64],
    grid: &TimeGrid,
    noise: &NoisePaths,
) -> Result<OpinionPath> {
    let fr = |i: usize, k: usize| &frames[if frames.len() == 1 { 0 } else { i }][k];
    integrate(
        regime,
        x0,
        grid,
        noise,
        policy,
        |i, k, x, u| fr(i, k).drift(x, u),
        |i, k, _, _| (2.0 * fr(i, k).sigma).sqrt(),
    )
}

/// Every agent relaxes toward the mean of `x_star_profile` at rate `gamma(s)`.
pub fn simulate_full_consensus(
    game: &Game,
    policy: &dyn ControlPolicy,
    x_star_profile: &[f64],
    x0: &[f64],
    grid: &TimeGrid,
    noise: &NoisePaths,
) -> Result<OpinionPath> {
    if !matches!(game.regime, GameRegime::FullConsensus { .. }) {
        return Err(Error::param("regime", "expected full_consensus"));
    }
    if x_star_profile.is_empty() {
        return Err(Error::param("x_star_profile", "empty profile"));
    }
    let mean = x_star_profile.iter().sum::<f64>() / x_star_profile.len() as f64;
    let fr = frames(game, mean, grid)?;
    simulate_frames("full_consensus", &[fr], policy, x0, grid, noise)
}

/// The leader relaxes toward the mean of its assigned opinions at rate `gamma_hat(s)`.
pub fn simulate_leader(
    game: &Game,
    policy: &dyn ControlPolicy,
    x0: f64,
    grid: &TimeGrid,
    noise: &NoisePaths,
) -> Result<OpinionPath> {
    let mean = match &game.regime {
        GameRegime::Leader { .. } => game.regime.fixed_reference().unwrap_or_default(),
        _ => return Err(Error::param("regime", "expected leader")),
    };
    let fr = frames(game, mean, grid)?;
    simulate_frames("leader", &[fr], policy, &[x0], grid, noise)
}

/// One follower game per agent, all anchored on the same committed leader opinion.
pub fn simulate_followers(
    games: &[Game],
    policy: &dyn ControlPolicy,
    x0: &[f64],
    grid: &TimeGrid,
    noise: &NoisePaths,
) -> Result<OpinionPath> {
    if games.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            block: "follower games",
            expected: x0.len().to_string(),
            got: games.len().to_string(),
        });
    }
    let fr = games
        .iter()
        .map(|g| match g.regime {
            GameRegime::Follower { .. } => frames(g, 0.0, grid),
            _ => Err(Error::param("regime", "expected follower")),
        })
        .collect::<Result<Vec<_>>>()?;
    simulate_frames("follower", &fr, policy, x0, grid, noise)
}
