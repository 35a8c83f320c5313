use rayon::prelude::*;
use serde::Serialize;

use super::config::{ControlMode, RegimeConfig, ScenarioConfig};
use crate::equilibrium::{
    feedback_control, mean_field_fixed_point, solve_opinion, AgentSpec, FixedPointOptions, Game, GameRegime,
    GameState,
};
use crate::error::{Error, Result};
use crate::sde::{
    opinion_gap_bound_check, simulate_followers, simulate_full_consensus, simulate_leader, ControlPolicy,
    EquilibriumFeedback, FeedbackAgent, NoisePaths, OpinionPath, TimeGrid, ZeroControl,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumProfile {
    /// Optimal opinion per agent at the decision time.
    pub x_star: Vec<f64>,
    /// Equilibrium control per agent at its optimal opinion.
    pub phi_star: Vec<f64>,
    pub decision_time: f64,
    /// Fixed-point iterations (full consensus).
    pub iterations: Option<usize>,
    /// The leader's committed opinion and the opinions it assigned.
    pub x_bar_1: Option<f64>,
    pub x_tilde: Option<Vec<f64>>,
    /// Real roots of the leader's opinion cubic.
    pub leader_roots: Option<Vec<f64>>,
}

/// Games and reference opinions fixed before any path is drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub profile: EquilibriumProfile,
    /// Game played by each agent.
    pub games: Vec<Game>,
    /// `(x_j, mean_opt)` seen by each agent.
    pub references: Vec<(f64, f64)>,
    /// State at which each agent's equilibrium control was solved.
    pub states: Vec<GameState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaRecord {
    pub replica: u32,
    /// `opinions[agent][k]` at the recorded times.
    pub opinions: Vec<Vec<f64>>,
    pub spread: Vec<f64>,
    pub gap_pairs: usize,
    pub gap_passed: usize,
    pub excursions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub name: String,
    pub regime: String,
    pub seed: u64,
    pub grid: TimeGrid,
    pub times: Vec<f64>,
    pub equilibrium: EquilibriumProfile,
    /// `max_{i,j} |x_i - x_j|` averaged over replicas, with a 95% band.
    pub spread_mean: Vec<f64>,
    pub spread_lo: Vec<f64>,
    pub spread_hi: Vec<f64>,
    /// `mean_opinions[agent][k]`
    pub mean_opinions: Vec<Vec<f64>>,
    pub gap_pairs: usize,
    pub gap_pass_rate: f64,
    pub excursions: usize,
    #[serde(skip)]
    pub replicas: Vec<ReplicaRecord>,
    /// Full path of the lowest-numbered replica.
    #[serde(skip)]
    pub sample_path: OpinionPath,
}

fn regime_game(cfg: &ScenarioConfig, regime: GameRegime) -> Result<Game> {
    Game::new(regime, cfg.h_params.to_params()?, cfg.grid.t)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn full_consensus(cfg: &ScenarioConfig, k: f64, w: f64, sigma: f64) -> Result<Solved> {
    let n = cfg.network.n;
    let game = regime_game(cfg, GameRegime::FullConsensus { k, w, n, sigma })?;
    let agents: Vec<AgentSpec> = (0..n)
        .map(|i| AgentSpec {
            x0: cfg.agents.x0[i],
            multiplier: cfg.agents.multiplier_of(i).clone(),
        })
        .collect();
    let opts = FixedPointOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        damping: cfg.solver.damping,
        decision_time: cfg.decision_time(),
    };
    let rep = mean_field_fixed_point(&game, &agents, &cfg.agents.x0, &opts)?;
    let m = mean(&rep.profile);
    let states = (0..n)
        .map(|i| {
            GameState::new(opts.decision_time, rep.profile[i], m, cfg.agents.x0[i], m, rep.controls[i], &agents[i].multiplier)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Solved {
        profile: EquilibriumProfile {
            x_star: rep.profile,
            phi_star: rep.controls,
            decision_time: opts.decision_time,
            iterations: Some(rep.iterations),
            x_bar_1: None,
            x_tilde: None,
            leader_roots: None,
        },
        games: vec![game; n],
        references: vec![(m, m); n],
        states,
    })
}

fn decision_state(cfg: &ScenarioConfig, game: &Game, agent: usize, x_j: f64, mean_opt: f64) -> Result<(GameState, f64)> {
    let x0 = cfg.agents.x0[agent];
    let st = GameState::new(cfg.decision_time(), x0, x_j, x0, mean_opt, 0.0, cfg.agents.multiplier_of(agent))?;
    let u = feedback_control(game, &st)?;
    Ok((st.with_u(u), u))
}

fn leader_then_followers(cfg: &ScenarioConfig, w_bar: f64, sigma_1: f64, sigma: f64, x_tilde: &[f64]) -> Result<Solved> {
    let n = cfg.network.n;
    let l = cfg.leader_index();
    let x_mean = mean(x_tilde);
    let leader = regime_game(
        cfg,
        GameRegime::Leader {
            k_1: cfg.network.stubbornness[l],
            w_bar,
            n,
            sigma_1,
            x_tilde: x_tilde.to_vec(),
        },
    )?;
    let (st, u_l) = decision_state(cfg, &leader, l, x_mean, x_mean).map_err(|e| e.context("leader control"))?;
    let sol = solve_opinion(&leader, &st).map_err(|e| e.context("leader opinion"))?;
    let x_bar = sol.x;
    let mut states = vec![st; n];

    let mut games = Vec::with_capacity(n);
    let mut x_star = vec![0.0; n];
    let mut phi_star = vec![0.0; n];
    let mut references = Vec::with_capacity(n);
    for i in 0..n {
        if i == l {
            games.push(leader.clone());
            x_star[i] = x_bar;
            phi_star[i] = u_l;
            references.push((x_mean, x_mean));
            continue;
        }
        let game = regime_game(
            cfg,
            GameRegime::Follower {
                k_i: cfg.network.stubbornness[i],
                w_i1: cfg.network.weight(i + 1, l + 1),
                sigma,
                x_bar_1: x_bar,
                drift_sign: cfg.solver.follower_drift_sign,
            },
        )?;
        let (st, u) = decision_state(cfg, &game, i, x_bar, x_bar).map_err(|e| e.context(format!("follower {} control", i + 1)))?;
        let x = solve_opinion(&game, &st).map_err(|e| e.context(format!("follower {} opinion", i + 1)))?.x;
        states[i] = st;
        x_star[i] = x;
        phi_star[i] = u;
        games.push(game);
        references.push((x_bar, x_bar));
    }
    Ok(Solved {
        profile: EquilibriumProfile {
            x_star,
            phi_star,
            decision_time: cfg.decision_time(),
            iterations: None,
            x_bar_1: Some(x_bar),
            x_tilde: Some(x_tilde.to_vec()),
            leader_roots: Some(sol.roots.roots.clone()),
        },
        games,
        references,
        states,
    })
}

/// Equilibrium profile only: the mean-field fixed point, or the leader's
/// commitment followed by each follower's best response.
pub fn solve_scenario(cfg: &ScenarioConfig) -> Result<Solved> {
    let out = match &cfg.regime {
        RegimeConfig::FullConsensus { k, w, sigma } => full_consensus(cfg, *k, *w, *sigma),
        RegimeConfig::Leader {
            w_bar,
            sigma_1,
            sigma,
            x_tilde,
            ..
        } => {
            let xt = x_tilde
                .as_ref()
                .ok_or_else(|| Error::config("regime.x_tilde", "required when regime.x_star is not given"))?;
            leader_then_followers(cfg, *w_bar, *sigma_1, *sigma, xt)
        }
    };
    out.map_err(|e| e.context(format!("solving scenario `{}`", cfg.name)))
}

struct Frozen(Vec<f64>);

impl ControlPolicy for Frozen {
    fn control(&self, agent: usize, _: f64, _: f64) -> Result<f64> {
        Ok(self.0[agent])
    }
}

fn policy_for(cfg: &ScenarioConfig, solved: &Solved, agents: &[usize]) -> Box<dyn ControlPolicy> {
    match cfg.solver.control {
        ControlMode::Zero => Box::new(ZeroControl),
        ControlMode::Frozen => Box::new(Frozen(agents.iter().map(|&i| solved.profile.phi_star[i]).collect())),
        ControlMode::Feedback => Box::new(EquilibriumFeedback {
            agents: agents
                .iter()
                .map(|&i| FeedbackAgent {
                    game: solved.games[i].clone(),
                    x0: cfg.agents.x0[i],
                    multiplier: cfg.agents.multiplier_of(i).clone(),
                    x_j: solved.references[i].0,
                    mean_opt: solved.references[i].1,
                })
                .collect(),
        }),
    }
}

/// Interleaves per-group paths back into agent order.
fn assemble(grid: TimeGrid, regime: &str, parts: Vec<(Vec<usize>, OpinionPath)>, n: usize) -> OpinionPath {
    let mut opinions = vec![Vec::new(); n];
    let mut controls = vec![Vec::new(); n];
    let mut increments = vec![Vec::new(); n];
    let mut excursions = 0;
    for (ids, p) in parts {
        excursions += p.excursions;
        for (slot, &i) in ids.iter().enumerate() {
            opinions[i] = p.opinions[slot].clone();
            controls[i] = p.controls[slot].clone();
            increments[i] = p.increments[slot].clone();
        }
    }
    OpinionPath {
        grid,
        regime: regime.to_string(),
        opinions,
        controls,
        increments,
        excursions,
    }
}

/// One closed-loop path of every agent under replica `replica`'s noise.
pub fn simulate_replica(cfg: &ScenarioConfig, solved: &Solved, replica: u32) -> Result<(OpinionPath, NoisePaths)> {
    let grid = cfg.grid.time_grid()?;
    let n = cfg.network.n;
    let noise = NoisePaths::generate(cfg.monte_carlo.seed, replica, n, grid);
    let path = match &cfg.regime {
        RegimeConfig::FullConsensus { .. } => {
            let all: Vec<usize> = (0..n).collect();
            let policy = policy_for(cfg, solved, &all);
            simulate_full_consensus(&solved.games[0], policy.as_ref(), &solved.profile.x_star, &cfg.agents.x0, &grid, &noise)?
        }
        RegimeConfig::Leader { .. } => {
            let l = cfg.leader_index();
            let followers: Vec<usize> = (0..n).filter(|&i| i != l).collect();
            let lp = simulate_leader(
                &solved.games[l],
                policy_for(cfg, solved, &[l]).as_ref(),
                cfg.agents.x0[l],
                &grid,
                &noise.subset(&[l])?,
            )?;
            let games: Vec<Game> = followers.iter().map(|&i| solved.games[i].clone()).collect();
            let x0: Vec<f64> = followers.iter().map(|&i| cfg.agents.x0[i]).collect();
            let fp = simulate_followers(
                &games,
                policy_for(cfg, solved, &followers).as_ref(),
                &x0,
                &grid,
                &noise.subset(&followers)?,
            )?;
            assemble(grid, "leader", vec![(vec![l], lp), (followers, fp)], n)
        }
    };
    Ok((path, noise))
}

/// Pairs that play the same game against the same reference, so the
/// opinion-gap bound applies to their difference.
fn bound_pairs(solved: &Solved) -> Vec<(usize, usize)> {
    let n = solved.games.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if solved.games[i] == solved.games[j] && solved.references[i] == solved.references[j] {
                out.push((i, j));
            }
        }
    }
    out
}

fn record(cfg: &ScenarioConfig, solved: &Solved, replica: u32, path: &OpinionPath, noise: &NoisePaths) -> Result<ReplicaRecord> {
    let every = cfg.record_every();
    let steps = path.grid.steps;
    let idx: Vec<usize> = (0..=steps).step_by(every).chain((steps % every != 0).then_some(steps)).collect();
    let opinions: Vec<Vec<f64>> = path.opinions.iter().map(|p| idx.iter().map(|&k| p[k]).collect()).collect();
    let spread = idx
        .iter()
        .map(|&k| {
            let (lo, hi) = path
                .opinions
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])));
            hi - lo
        })
        .collect();
    let pairs = bound_pairs(solved);
    let mut passed = 0;
    for &(i, j) in &pairs {
        let rep = opinion_gap_bound_check(path, i, j, &solved.games[i], solved.references[i].1, noise)?;
        if rep.holds_running {
            passed += 1;
        }
    }
    Ok(ReplicaRecord {
        replica,
        opinions,
        spread,
        gap_pairs: pairs.len(),
        gap_passed: passed,
        excursions: path.excursions,
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl EnsembleSummary {
    /// Statistics over `replicas`, reduced in replica-id order so that the
    /// result does not depend on how the ensemble was split.
    pub fn from_replicas(
        cfg: &ScenarioConfig,
        equilibrium: EquilibriumProfile,
        mut replicas: Vec<ReplicaRecord>,
        sample_path: OpinionPath,
    ) -> Result<Self> {
        if replicas.is_empty() {
            return Err(Error::param("replicas", "empty ensemble"));
        }
        replicas.sort_by_key(|r| r.replica);
        if replicas.windows(2).any(|w| w[0].replica == w[1].replica) {
            return Err(Error::param("replicas", "duplicate replica id"));
        }
        let grid = cfg.grid.time_grid()?;
        let every = cfg.record_every();
        let times: Vec<f64> = (0..=grid.steps)
            .step_by(every)
            .chain((grid.steps % every != 0).then_some(grid.steps))
            .map(|k| grid.point(k))
            .collect();
        let m = replicas.len() as f64;
        let nt = times.len();
        let n = replicas[0].opinions.len();

        let mut spread_mean = vec![0.0; nt];
        let mut spread_lo = vec![0.0; nt];
        let mut spread_hi = vec![0.0; nt];
        let mut col = Vec::with_capacity(replicas.len());
        for k in 0..nt {
            col.clear();
            col.extend(replicas.iter().map(|r| r.spread[k]));
            spread_mean[k] = col.iter().sum::<f64>() / m;
            col.sort_by(f64::total_cmp);
            spread_lo[k] = quantile(&col, 0.025);
            spread_hi[k] = quantile(&col, 0.975);
        }
        let mean_opinions = (0..n)
            .map(|a| (0..nt).map(|k| replicas.iter().map(|r| r.opinions[a][k]).sum::<f64>() / m).collect())
            .collect();
        let gap_pairs: usize = replicas.iter().map(|r| r.gap_pairs).sum();
        let gap_passed: usize = replicas.iter().map(|r| r.gap_passed).sum();
        Ok(Self {
            name: cfg.name.clone(),
            regime: cfg.regime.kind().to_string(),
            seed: cfg.monte_carlo.seed,
            grid,
            times,
            equilibrium,
            spread_mean,
            spread_lo,
            spread_hi,
            mean_opinions,
            gap_pairs,
            gap_pass_rate: if gap_pairs == 0 { 1.0 } else { gap_passed as f64 / gap_pairs as f64 },
            excursions: replicas.iter().map(|r| r.excursions).sum(),
            replicas,
            sample_path,
        })
    }

    /// Pools two ensembles of the same scenario drawn on disjoint replica ids.
    pub fn merge(self, other: EnsembleSummary, cfg: &ScenarioConfig) -> Result<Self> {
        if self.equilibrium != other.equilibrium || self.grid != other.grid || self.seed != other.seed {
            return Err(Error::param("merge", "summaries come from different scenarios"));
        }
        let first = |s: &EnsembleSummary| s.replicas.iter().map(|r| r.replica).min().unwrap_or(u32::MAX);
        let sample = if first(&self) <= first(&other) { self.sample_path } else { other.sample_path };
        let mut reps = self.replicas;
        reps.extend(other.replicas);
        Self::from_replicas(cfg, self.equilibrium, reps, sample)
    }
}

/// Solves the equilibrium, then simulates every replica in parallel.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<EnsembleSummary> {
    let solved = solve_scenario(cfg)?;
    run_with(cfg, &solved)
}

pub fn run_with(cfg: &ScenarioConfig, solved: &Solved) -> Result<EnsembleSummary> {
    let mc = cfg.monte_carlo;
    let ids: Vec<u32> = (mc.first_replica..mc.first_replica + mc.replicas).collect();
    let results: Vec<Result<(ReplicaRecord, Option<OpinionPath>)>> = ids
        .par_iter()
        .map(|&r| {
            let (path, noise) = simulate_replica(cfg, solved, r).map_err(|e| e.context(format!("replica {r}")))?;
            let rec = record(cfg, solved, r, &path, &noise)?;
            Ok((rec, (r == mc.first_replica).then_some(path)))
        })
        .collect();
    let mut records = Vec::with_capacity(ids.len());
    let mut sample = None;
    for res in results {
        let (rec, path) = res.map_err(|e| e.context(format!("running scenario `{}`", cfg.name)))?;
        records.push(rec);
        if path.is_some() {
            sample = path;
        }
    }
    let sample = sample.ok_or_else(|| Error::param("replicas", "no sample path"))?;
    EnsembleSummary::from_replicas(cfg, solved.profile.clone(), records, sample)
}
