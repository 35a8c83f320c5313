use serde::Serialize;

use super::regime::{Game, GameState};
use super::solver::{feedback_control, optimal_opinion};
use crate::coefficients::MultiplierModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub x0: f64,
    pub multiplier: MultiplierModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate; 1 is the undamped map.
    pub damping: f64,
    /// Time at which controls and opinions are evaluated.
    pub decision_time: f64,
}

impl FixedPointOptions {
    pub fn new(tol: f64, max_iter: usize, decision_time: f64) -> Self {
        Self {
            tol,
            max_iter,
            damping: 0.5,
            decision_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointReport {
    /// Optimal opinion per agent.
    pub profile: Vec<f64>,
    /// Feedback control per agent at its optimal opinion.
    pub controls: Vec<f64>,
    pub iterations: usize,
    pub last_change: f64,
}

/// Agent `i`'s optimal opinion given the population mean `mean`, with its
/// control taken as the feedback control at its current opinion `x`.
fn respond(game: &Game, agent: &AgentSpec, x: f64, mean: f64, s: f64) -> Result<(f64, f64)> {
    let st = GameState::new(s, x, mean, agent.x0, mean, 0.0, &agent.multiplier)?;
    let u = feedback_control(game, &st)?;
    let x_new = optimal_opinion(game, &st.with_u(u))?;
    Ok((x_new, u))
}

/// Damped iteration of the best-response map `x -> x*(mean(x))` from `start`.
///
/// The mean runs over every agent, including the one responding.
pub fn mean_field_fixed_point(
    game: &Game,
    agents: &[AgentSpec],
    start: &[f64],
    opts: &FixedPointOptions,
) -> Result<FixedPointReport> {
    if agents.is_empty() || start.len() != agents.len() {
        return Err(Error::DimensionMismatch {
            block: "start profile",
            expected: agents.len().to_string(),
            got: start.len().to_string(),
        });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("tol", "must be > 0"));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::param("damping", "must lie in (0, 1]"));
    }

    let a = opts.damping;
    let mut x = start.to_vec();
    let mut controls = vec![0.0; agents.len()];
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        change = 0.0;
        let mut next = Vec::with_capacity(x.len());
        for (i, agent) in agents.iter().enumerate() {
            let (resp, u) = respond(game, agent, x[i], mean, opts.decision_time)
                .map_err(|e| e.context(format!("agent {} at iteration {it}", i + 1)))?;
            let xn = (1.0 - a) * x[i] + a * resp;
            if !xn.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: f64::INFINITY,
                    profile: x,
                });
            }
            change = f64::max(change, (xn - x[i]).abs());
            controls[i] = u;
            next.push(xn);
        }
        x = next;
        if change < opts.tol {
            return Ok(FixedPointReport {
                profile: x,
                controls,
                iterations: it,
                last_change: change,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: change,
        profile: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::HParams;
    use crate::equilibrium::GameRegime;

    fn game() -> Game {
        Game::new(
            GameRegime::FullConsensus {
                k: 2.0,
                w: 0.3,
                n: 3,
                sigma: 0.1,
            },
            HParams::new(0.3, 0.1).unwrap(),
            1.0,
        )
        .unwrap()
    }

    fn agents(x0: &[f64]) -> Vec<AgentSpec> {
        x0.iter()
            .map(|&x0| AgentSpec {
                x0,
                multiplier: MultiplierModel::default(),
            })
            .collect()
    }

    #[test]
    fn identical_agents_give_symmetric_profile() {
        let ag = agents(&[0.4, 0.4, 0.4]);
        let rep = mean_field_fixed_point(&game(), &ag, &[0.4; 3], &FixedPointOptions::new(1e-10, 500, 0.5)).unwrap();
        assert!(rep.profile.iter().all(|&x| x == rep.profile[0]));
    }

    #[test]
    fn converged_profile_is_stationary() {
        let ag = agents(&[0.2, 0.5, 0.8]);
        let opts = FixedPointOptions::new(1e-8, 500, 0.5);
        let rep = mean_field_fixed_point(&game(), &ag, &[0.2, 0.5, 0.8], &opts).unwrap();
        let again = mean_field_fixed_point(&game(), &ag, &rep.profile, &opts).unwrap();
        assert_eq!(again.iterations, 1);
        assert!(again.last_change < 1e-8);
    }

    #[test]
    fn reports_non_convergence() {
        let ag = agents(&[0.2, 0.5, 0.8]);
        let err = mean_field_fixed_point(&game(), &ag, &[0.2, 0.5, 0.8], &FixedPointOptions::new(1e-30, 2, 0.5))
            .unwrap_err();
        match err {
            Error::NoConvergence { iterations, profile, .. } => {
                assert_eq!(iterations, 2);
                assert_eq!(profile.len(), 3);
            }
            other => panic!("{other}"),
        }
    }
}
