//! Closed-form time-varying coefficients of the three game regimes, the
//! exponential auxiliary function and the Lagrange-multiplier trajectory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest argument accepted by `exp` before it overflows `f64`.
pub const EXP_ARG_MAX: f64 = 709.0;

/// Tolerance below which a multiplier value counts as zero.
pub const MULTIPLIER_ZERO_TOL: f64 = 1e-12;

/// `cosh(a) / cosh(c)` for `a, c >= 0` without overflow.
pub fn cosh_ratio(a: f64, c: f64) -> f64 {
    (a - c).exp() * (1.0 + (-2.0 * a).exp()) / (1.0 + (-2.0 * c).exp())
}

/// `sinh(a) / cosh(c)` for `a, c >= 0` without overflow.
pub fn sinh_cosh_ratio(a: f64, c: f64) -> f64 {
    (a - c).exp() * (1.0 - (-2.0 * a).exp()) / (1.0 + (-2.0 * c).exp())
}

/// `floor + amplitude * cosh(rate (t - s)) / cosh(rate t)` on `[0, t]`.
///
/// All of gamma, gamma-hat and xi-hat share this shape. `start` is the exact
/// value at `s = 0` (gamma(0) = 1 without relying on `k / lambda + n w / lambda`
/// rounding to one); later values are capped by it so rounding never lifts
/// the profile above its starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoshProfile {
    pub floor: f64,
    pub amplitude: f64,
    pub start: f64,
    pub rate: f64,
    pub horizon: f64,
}

impl CoshProfile {
    pub fn new(floor: f64, amplitude: f64, start: f64, rate: f64, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("t", format!("horizon must be positive, got {horizon}")));
        }
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::param("rate", format!("must be finite and >= 0, got {rate}")));
        }
        Ok(Self {
            floor,
            amplitude,
            start,
            rate,
            horizon,
        })
    }

    fn check(&self, s: f64) -> Result<f64> {
        check_time(s, self.horizon)
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        let s = self.check(s)?;
        if s == 0.0 {
            return Ok(self.start);
        }
        let c = self.rate * self.horizon;
        let v = self.floor + self.amplitude * cosh_ratio(self.rate * (self.horizon - s), c);
        Ok(v.min(self.start))
    }

    /// Time derivative of [`value`](Self::value).
    pub fn derivative(&self, s: f64) -> Result<f64> {
        let s = self.check(s)?;
        let c = self.rate * self.horizon;
        Ok(-self.amplitude * self.rate * sinh_cosh_ratio(self.rate * (self.horizon - s), c))
    }
}

/// Accepts `s` in `[0, t]`, absorbing the rounding of grid points `k * (t / steps)`.
pub fn check_time(s: f64, horizon: f64) -> Result<f64> {
    let slack = 1e-12 * horizon.abs().max(1.0);
    if !s.is_finite() || s < -slack || s > horizon + slack {
        return Err(Error::TimeOutOfRange { s, horizon });
    }
    Ok(s.clamp(0.0, horizon))
}

/// Constants feeding gamma, gamma-hat and xi-hat.
///
/// `k` doubles as the follower's own stubbornness `k_i` in [`xi_hat`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientParams {
    pub k: f64,
    pub w: f64,
    #[serde(default)]
    pub w_bar: f64,
    #[serde(default)]
    pub k_1: f64,
    #[serde(default)]
    pub w_i1: f64,
    pub n: usize,
    pub t: f64,
}

impl CoefficientParams {
    /// `lambda_1 = k + n w`
    pub fn lambda_1(&self) -> f64 {
        self.k + self.n as f64 * self.w
    }

    /// `lambda_1_hat = k_1 + n w_bar`
    pub fn lambda_1_hat(&self) -> f64 {
        self.k_1 + self.n as f64 * self.w_bar
    }

    /// `lambda_tilde_i = k_i + w_i1`
    pub fn lambda_tilde(&self) -> f64 {
        self.k + self.w_i1
    }

    pub fn gamma_profile(&self) -> Result<CoshProfile> {
        let l = positive("lambda_1 = k + n w", self.lambda_1())?;
        CoshProfile::new(self.k / l, self.n as f64 * self.w / l, 1.0, l.sqrt(), self.t)
    }

    pub fn gamma_hat_profile(&self) -> Result<CoshProfile> {
        let l = positive("lambda_1_hat = k_1 + n w_bar", self.lambda_1_hat())?;
        CoshProfile::new(self.k_1 / l, self.n as f64 * self.w_bar / l, 1.0, l.sqrt(), self.t)
    }

    pub fn xi_hat_profile(&self) -> Result<CoshProfile> {
        let l = positive("lambda_tilde = k_i + w_i1", self.lambda_tilde())?;
        CoshProfile::new(0.0, self.w_i1 / l, self.w_i1 / l, l.sqrt(), self.t)
    }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {value}")))
    }
}

pub fn gamma(s: f64, p: &CoefficientParams) -> Result<f64> {
    p.gamma_profile()?.value(s)
}

pub fn gamma_hat(s: f64, p: &CoefficientParams) -> Result<f64> {
    p.gamma_hat_profile()?.value(s)
}

pub fn xi_hat(s: f64, p: &CoefficientParams) -> Result<f64> {
    p.xi_hat_profile()?.value(s)
}

/// Parameters of `h(s, x) = exp(s b x + d)`; the linearisation constant is `e = 1 + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HParams {
    pub b: f64,
    pub d: f64,
}

impl HParams {
    pub fn new(b: f64, d: f64) -> Result<Self> {
        let hp = Self { b, d };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        positive("h.b", self.b)?;
        positive("h.d", self.d)?;
        Ok(())
    }

    pub fn e(&self) -> f64 {
        1.0 + self.d
    }
}

pub fn h_exact(s: f64, x: f64, hp: &HParams) -> Result<f64> {
    let arg = s * hp.b * x + hp.d;
    if !arg.is_finite() || arg > EXP_ARG_MAX {
        return Err(Error::Overflow {
            what: "h(s, x) = exp(s b x + d)",
            exponent: arg,
        });
    }
    Ok(arg.exp())
}

/// First-order expansion `e + s b x` of [`h_exact`].
pub fn h_approx(s: f64, x: f64, hp: &HParams) -> f64 {
    hp.e() + s * hp.b * x
}

/// `lambda(s)` with its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierValue {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Lagrange multiplier trajectory `lambda(s) = sum_k c_k s^k`, degree at most 4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiplierModel {
    coefficients: Vec<f64>,
}

impl Default for MultiplierModel {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

impl MultiplierModel {
    pub const MAX_DEGREE: usize = 4;

    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let model = Self { coefficients };
        model.validate()?;
        Ok(model)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            coefficients: vec![value],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() || self.coefficients.len() > Self::MAX_DEGREE + 1 {
            return Err(Error::param(
                "multiplier",
                format!("need 1..={} coefficients, got {}", Self::MAX_DEGREE + 1, self.coefficients.len()),
            ));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("multiplier", "coefficients must be finite"));
        }
        Ok(())
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Horner evaluation of the polynomial and its exact derivatives.
    pub fn eval(&self, s: f64) -> Result<MultiplierValue> {
        let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
        for &c in self.coefficients.iter().rev() {
            ddp = ddp * s + 2.0 * dp;
            dp = dp * s + p;
            p = p * s + c;
        }
        if p.abs() < MULTIPLIER_ZERO_TOL {
            return Err(Error::DegenerateMultiplier { s, value: p });
        }
        Ok(MultiplierValue {
            value: p,
            d1: dp,
            d2: ddp,
        })
    }
}
