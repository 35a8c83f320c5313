use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficients::{HParams, MultiplierModel};
use crate::equilibrium::DriftSign;
use crate::error::{Error, Result};
use crate::network::NetworkSpec;
use crate::sde::TimeGrid;
use crate::spectral::SpatialGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub network: NetworkSpec,
    pub agents: AgentsConfig,
    pub regime: RegimeConfig,
    #[serde(default)]
    pub h_params: HParamsConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub pde: PdeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    /// Initial opinions, in agent-id order.
    pub x0: Vec<f64>,
    /// Multiplier shared by every agent without an entry in `multipliers`.
    #[serde(default)]
    pub multiplier: MultiplierModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multipliers: Option<Vec<MultiplierModel>>,
}

impl AgentsConfig {
    pub fn multiplier_of(&self, agent: usize) -> &MultiplierModel {
        self.multipliers
            .as_ref()
            .and_then(|m| m.get(agent))
            .unwrap_or(&self.multiplier)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegimeConfig {
    /// Homogeneous mean-field game; `n` comes from the network.
    FullConsensus { k: f64, w: f64, sigma: f64 },
    /// Leader at `network.leader` (default agent 1); stubbornness and the
    /// follower weights `w_i1` come from the network.
    Leader {
        w_bar: f64,
        sigma_1: f64,
        /// Follower diffusion.
        sigma: f64,
        /// Opinions the leader assigns to the other agents, in id order.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_tilde: Option<Vec<f64>>,
        /// The other agents' optimal opinions; `x_tilde` defaults to `0.9 x_star`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_star: Option<Vec<f64>>,
    },
}

impl RegimeConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            RegimeConfig::FullConsensus { .. } => "full_consensus",
            RegimeConfig::Leader { .. } => "leader",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HParamsConfig {
    pub b: f64,
    pub d: f64,
}

impl Default for HParamsConfig {
    fn default() -> Self {
        Self { b: 0.3, d: 0.1 }
    }
}

impl HParamsConfig {
    pub fn to_params(self) -> Result<HParams> {
        HParams::new(self.b, self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Stride of the time points kept in ensemble statistics; 0 picks one
    /// giving at most 1000 intervals.
    #[serde(default)]
    pub record_every: usize,
}

impl GridConfig {
    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub replicas: u32,
    pub seed: u64,
    /// Id of the first replica; replica `r` always draws the same noise.
    #[serde(default)]
    pub first_replica: u32,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            replicas: 1,
            seed: 0,
            first_replica: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// Equilibrium feedback evaluated at the current opinion.
    #[default]
    Feedback,
    /// Equilibrium control at the decision state, held constant.
    Frozen,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub follower_drift_sign: DriftSign,
    /// Time at which equilibrium opinions are solved; defaults to `t / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_time: Option<f64>,
    pub control: ControlMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 1000,
            damping: 0.5,
            follower_drift_sign: DriftSign::Plus,
            decision_time: None,
            control: ControlMode::Feedback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: vec!["csv".into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    /// Evolution time of the demos.
    pub s: f64,
    /// Variance of the Gaussian initial field.
    pub variance: f64,
}

impl Default for PdeConfig {
    fn default() -> Self {
        let g = SpatialGrid::default();
        Self {
            x_min: g.x_min,
            x_max: g.x_max,
            n: g.n,
            s: 0.5,
            variance: 0.01,
        }
    }
}

fn default_name() -> String {
    "scenario".into()
}

fn default_steps() -> usize {
    10_000
}

const FORMATS: [&str; 2] = ["csv", "json"];

fn finite_nonneg(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be finite and >= 0, got {v}")))
    }
}

fn opinion(path: String, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(path, format!("opinion {v} outside [0, 1]")))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        cfg.fill_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    /// Hex SHA-256 of the serialized effective config.
    pub fn hash(&self) -> Result<String> {
        Ok(hex(&Sha256::digest(self.to_toml()?.as_bytes())))
    }

    pub fn decision_time(&self) -> f64 {
        self.solver.decision_time.unwrap_or(self.grid.t / 2.0)
    }

    /// 0-based index of the leader.
    pub fn leader_index(&self) -> usize {
        self.network.leader.unwrap_or(1) - 1
    }

    pub fn record_every(&self) -> usize {
        if self.grid.record_every > 0 {
            self.grid.record_every
        } else {
            self.grid.steps.div_ceil(1000).max(1)
        }
    }

    pub fn pde_grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.pde.x_min, self.pde.x_max, self.pde.n).map_err(|e| Error::config("pde", e.to_string()))
    }

    fn fill_defaults(&mut self) {
        if self.solver.decision_time.is_none() {
            self.solver.decision_time = Some(self.grid.t / 2.0);
        }
        if self.grid.record_every == 0 {
            self.grid.record_every = self.record_every();
        }
        if let RegimeConfig::Leader {
            x_tilde: x_tilde @ None,
            x_star: Some(star),
            ..
        } = &mut self.regime
        {
            *x_tilde = Some(star.iter().map(|x| 0.9 * x).collect());
        }
    }

    pub fn validate(&self) -> Result<()> {
        let report = self.network.validate();
        if let Some(v) = report.violations.first() {
            return Err(Error::config(format!("network.{}", v.field), report.to_string()));
        }
        let n = self.network.n;

        if self.agents.x0.len() != n {
            return Err(Error::config(
                "agents.x0",
                format!("expected {n} entries, got {}", self.agents.x0.len()),
            ));
        }
        for (i, &x) in self.agents.x0.iter().enumerate() {
            opinion(format!("agents.x0[{i}]"), x)?;
        }
        self.agents
            .multiplier
            .validate()
            .map_err(|e| Error::config("agents.multiplier", e.to_string()))?;
        if let Some(ms) = &self.agents.multipliers {
            if ms.len() != n {
                return Err(Error::config(
                    "agents.multipliers",
                    format!("expected {n} entries, got {}", ms.len()),
                ));
            }
            for (i, m) in ms.iter().enumerate() {
                m.validate()
                    .map_err(|e| Error::config(format!("agents.multipliers[{i}]"), e.to_string()))?;
            }
        }

        match &self.regime {
            RegimeConfig::FullConsensus { k, w, sigma } => {
                finite_nonneg("regime.k", *k)?;
                finite_nonneg("regime.w", *w)?;
                finite_nonneg("regime.sigma", *sigma)?;
                if !(*k + n as f64 * *w > 0.0) {
                    return Err(Error::config("regime.k", "k + n w must be > 0"));
                }
            }
            RegimeConfig::Leader {
                w_bar,
                sigma_1,
                sigma,
                x_tilde,
                x_star,
            } => {
                finite_nonneg("regime.w_bar", *w_bar)?;
                finite_nonneg("regime.sigma_1", *sigma_1)?;
                finite_nonneg("regime.sigma", *sigma)?;
                let Some(xt) = x_tilde else {
                    return Err(Error::config(
                        "regime.x_tilde",
                        "required when regime.x_star is not given",
                    ));
                };
                if xt.len() != n - 1 {
                    return Err(Error::config(
                        "regime.x_tilde",
                        format!("expected {} entries (one per follower), got {}", n - 1, xt.len()),
                    ));
                }
                for (i, &x) in xt.iter().enumerate() {
                    opinion(format!("regime.x_tilde[{i}]"), x)?;
                }
                if let Some(xs) = x_star {
                    if xs.len() != n - 1 {
                        return Err(Error::config(
                            "regime.x_star",
                            format!("expected {} entries, got {}", n - 1, xs.len()),
                        ));
                    }
                    for (i, (&a, &b)) in xt.iter().zip(xs).enumerate() {
                        if !(a < b) {
                            return Err(Error::config(
                                format!("regime.x_tilde[{i}]"),
                                format!("assigned opinion {a} must lie below x_star {b}"),
                            ));
                        }
                    }
                }
                let l = self.leader_index();
                for i in (0..n).filter(|&i| i != l) {
                    if !(self.network.stubbornness[i] + self.network.weight(i + 1, l + 1) > 0.0) {
                        return Err(Error::config(
                            format!("network.stubbornness[{i}]"),
                            "follower needs k_i + w_i1 > 0",
                        ));
                    }
                }
            }
        }

        self.h_params
            .to_params()
            .map_err(|e| Error::config("h_params", e.to_string()))?;
        if !(self.grid.t > 0.0 && self.grid.t.is_finite()) {
            return Err(Error::config("grid.t", format!("horizon must be > 0, got {}", self.grid.t)));
        }
        if self.grid.steps == 0 {
            return Err(Error::config("grid.steps", "need at least one step"));
        }
        if self.monte_carlo.replicas == 0 {
            return Err(Error::config("monte_carlo.replicas", "need at least one replica"));
        }
        if self.monte_carlo.first_replica.checked_add(self.monte_carlo.replicas).is_none() {
            return Err(Error::config("monte_carlo.first_replica", "replica ids overflow u32"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::config("solver.tol", "must be > 0"));
        }
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            return Err(Error::config("solver.damping", "must lie in (0, 1]"));
        }
        let dt = self.decision_time();
        if !(0.0..=self.grid.t).contains(&dt) {
            return Err(Error::config(
                "solver.decision_time",
                format!("{dt} outside [0, {}]", self.grid.t),
            ));
        }
        for (i, f) in self.outputs.formats.iter().enumerate() {
            if !FORMATS.contains(&f.as_str()) {
                return Err(Error::config(
                    format!("outputs.formats[{i}]"),
                    format!("unknown format `{f}` (expected one of {FORMATS:?})"),
                ));
            }
        }
        self.pde_grid()?;
        if !(self.pde.s >= 0.0 && self.pde.variance > 0.0) {
            return Err(Error::config("pde", "need s >= 0 and variance > 0"));
        }
        Ok(())
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioConfig::parse(&text).map_err(|e| e.context(format!("loading {}", path.display())))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
