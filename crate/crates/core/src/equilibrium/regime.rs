use serde::{Deserialize, Serialize};

use crate::coefficients::{check_time, CoefficientParams, HParams, MultiplierModel, MultiplierValue};
use crate::error::{Error, Result};

/// Sign of the leader term in the follower drift `(k x ± w x_bar) / lambda_tilde`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftSign {
    #[default]
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl DriftSign {
    pub fn factor(self) -> f64 {
        match self {
            DriftSign::Plus => 1.0,
            DriftSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameRegime {
    FullConsensus {
        k: f64,
        w: f64,
        n: usize,
        sigma: f64,
    },
    Leader {
        k_1: f64,
        w_bar: f64,
        n: usize,
        sigma_1: f64,
        /// Opinions the leader assigns to the other agents.
        x_tilde: Vec<f64>,
    },
    Follower {
        k_i: f64,
        w_i1: f64,
        sigma: f64,
        /// The leader's committed opinion.
        x_bar_1: f64,
        #[serde(default)]
        drift_sign: DriftSign,
    },
}

/// Regime constants resolved at one time: drift `beta x + alpha - u`, cost
/// weights `W (x - x_ref)^2 / 2 + K (x - x0)^2 / 2`, and diffusion constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub weight: f64,
    pub stubbornness: f64,
    pub beta: f64,
    pub d_beta: f64,
    pub alpha: f64,
    pub d_alpha: f64,
    pub sigma: f64,
}

impl Frame {
    pub fn drift(&self, x: f64, u: f64) -> f64 {
        self.beta * x + self.alpha - u
    }
}

fn finite_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

impl GameRegime {
    pub fn validate(&self) -> Result<()> {
        match self {
            GameRegime::FullConsensus { k, w, n, sigma } => {
                finite_nonneg("k", *k)?;
                finite_nonneg("w", *w)?;
                finite_nonneg("sigma", *sigma)?;
                if *n < 2 {
                    return Err(Error::param("n", "need at least 2 agents"));
                }
                if k + *n as f64 * w <= 0.0 {
                    return Err(Error::param("k + n w", "must be > 0"));
                }
            }
            GameRegime::Leader {
                k_1,
                w_bar,
                n,
                sigma_1,
                x_tilde,
            } => {
                finite_nonneg("k_1", *k_1)?;
                finite_nonneg("w_bar", *w_bar)?;
                finite_nonneg("sigma_1", *sigma_1)?;
                if *n < 2 {
                    return Err(Error::param("n", "need at least 2 agents"));
                }
                if k_1 + *n as f64 * w_bar <= 0.0 {
                    return Err(Error::param("k_1 + n w_bar", "must be > 0"));
                }
                if x_tilde.is_empty() || x_tilde.iter().any(|x| !x.is_finite()) {
                    return Err(Error::param("x_tilde", "need at least one finite assigned opinion"));
                }
            }
            GameRegime::Follower {
                k_i,
                w_i1,
                sigma,
                x_bar_1,
                ..
            } => {
                finite_nonneg("k_i", *k_i)?;
                finite_nonneg("w_i1", *w_i1)?;
                finite_nonneg("sigma", *sigma)?;
                if k_i + w_i1 <= 0.0 {
                    return Err(Error::param("k_i + w_i1", "must be > 0"));
                }
                if !x_bar_1.is_finite() {
                    return Err(Error::param("x_bar_1", "must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn coefficient_params(&self, horizon: f64) -> CoefficientParams {
        let blank = CoefficientParams {
            k: 0.0,
            w: 0.0,
            w_bar: 0.0,
            k_1: 0.0,
            w_i1: 0.0,
            n: 1,
            t: horizon,
        };
        match *self {
            GameRegime::FullConsensus { k, w, n, .. } => CoefficientParams { k, w, n, ..blank },
            GameRegime::Leader { k_1, w_bar, n, .. } => CoefficientParams {
                k_1,
                w_bar,
                n,
                ..blank
            },
            GameRegime::Follower { k_i, w_i1, .. } => CoefficientParams {
                k: k_i,
                w_i1,
                ..blank
            },
        }
    }

    /// Mean of the leader's assigned opinions, or the follower's leader
    /// opinion. Full consensus has no fixed reference.
    pub fn fixed_reference(&self) -> Option<f64> {
        match self {
            GameRegime::FullConsensus { .. } => None,
            GameRegime::Leader { x_tilde, .. } => Some(x_tilde.iter().sum::<f64>() / x_tilde.len() as f64),
            GameRegime::Follower { x_bar_1, .. } => Some(*x_bar_1),
        }
    }

    pub fn diffusion(&self) -> f64 {
        match *self {
            GameRegime::FullConsensus { sigma, .. } | GameRegime::Follower { sigma, .. } => sigma,
            GameRegime::Leader { sigma_1, .. } => sigma_1,
        }
    }

    /// Resolves the regime at time `s`; `mean_opt` is the aggregate opinion
    /// the drift relaxes toward (ignored by followers, who use `x_bar_1`).
    pub fn frame(&self, s: f64, mean_opt: f64, horizon: f64) -> Result<Frame> {
        let cp = self.coefficient_params(horizon);
        let frame = match *self {
            GameRegime::FullConsensus { k, w, n, sigma } => {
                let prof = cp.gamma_profile()?;
                let (g, dg) = (prof.value(s)?, prof.derivative(s)?);
                Frame {
                    weight: n as f64 * w,
                    stubbornness: k,
                    beta: g,
                    d_beta: dg,
                    alpha: (1.0 - g) * mean_opt,
                    d_alpha: -dg * mean_opt,
                    sigma,
                }
            }
            GameRegime::Leader {
                k_1,
                w_bar,
                n,
                sigma_1,
                ..
            } => {
                let prof = cp.gamma_hat_profile()?;
                let (g, dg) = (prof.value(s)?, prof.derivative(s)?);
                Frame {
                    weight: n as f64 * w_bar,
                    stubbornness: k_1,
                    beta: g,
                    d_beta: dg,
                    alpha: (1.0 - g) * mean_opt,
                    d_alpha: -dg * mean_opt,
                    sigma: sigma_1,
                }
            }
            GameRegime::Follower {
                k_i,
                w_i1,
                sigma,
                x_bar_1,
                drift_sign,
            } => {
                let prof = cp.xi_hat_profile()?;
                let (xi, dxi) = (prof.value(s)?, prof.derivative(s)?);
                let lt = cp.lambda_tilde();
                Frame {
                    weight: w_i1,
                    stubbornness: k_i,
                    beta: k_i / lt + xi,
                    d_beta: dxi,
                    alpha: (drift_sign.factor() * w_i1 / lt - xi) * x_bar_1,
                    d_alpha: -dxi * x_bar_1,
                    sigma,
                }
            }
        };
        Ok(frame)
    }
}

/// Regime plus the constants shared by every agent playing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    pub regime: GameRegime,
    pub h: HParams,
    pub horizon: f64,
}

impl Game {
    pub fn new(regime: GameRegime, h: HParams, horizon: f64) -> Result<Self> {
        regime.validate()?;
        h.validate()?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("t", format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { regime, h, horizon })
    }

    pub fn frame(&self, st: &GameState) -> Result<Frame> {
        self.regime.frame(st.s, st.mean_opt, self.horizon)
    }
}

/// Point at which the f-function and its partials are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameState {
    pub s: f64,
    pub x_i: f64,
    /// Counterpart opinion in the disagreement cost.
    pub x_j: f64,
    pub x0_i: f64,
    pub mean_opt: f64,
    pub u: f64,
    pub lambda: MultiplierValue,
}

impl GameState {
    pub fn new(
        s: f64,
        x_i: f64,
        x_j: f64,
        x0_i: f64,
        mean_opt: f64,
        u: f64,
        multiplier: &MultiplierModel,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&x0_i) {
            return Err(Error::param("x0", format!("initial opinion must lie in [0, 1], got {x0_i}")));
        }
        Ok(Self {
            s,
            x_i,
            x_j,
            x0_i,
            mean_opt,
            u,
            lambda: multiplier.eval(s)?,
        })
    }

    pub fn with_u(self, u: f64) -> Self {
        Self { u, ..self }
    }

    pub fn with_x(self, x_i: f64) -> Self {
        Self { x_i, ..self }
    }

    pub(crate) fn checked(&self, horizon: f64) -> Result<()> {
        check_time(self.s, horizon)?;
        if self.lambda.value.abs() < crate::coefficients::MULTIPLIER_ZERO_TOL {
            return Err(Error::DegenerateMultiplier {
                s: self.s,
                value: self.lambda.value,
            });
        }
        Ok(())
    }
}
