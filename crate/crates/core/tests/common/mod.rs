#![allow(dead_code)]

use std::ops::{Add, Mul, Sub};

use opinion_game::coefficients::{HParams, MultiplierModel};
use opinion_game::equilibrium::{DriftSign, Game, GameRegime, GameState};
use rand::Rng;

/// Dense polynomial, lowest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn c(v: f64) -> Self {
        Poly(vec![v])
    }

    pub fn var() -> Self {
        Poly(vec![0.0, 1.0])
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.0.get(k).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        Poly(self.0.iter().map(|c| c * a).collect())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        self + o.scale(-1.0)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    FullConsensus,
    Leader,
    Follower,
}

pub const KINDS: [Kind; 3] = [Kind::FullConsensus, Kind::Leader, Kind::Follower];

/// Frame constants recomputed straight from the cosh closed forms.
#[derive(Debug, Clone, Copy)]
pub struct OracleFrame {
    pub weight: f64,
    pub stubbornness: f64,
    pub beta: f64,
    pub d_beta: f64,
    pub alpha: f64,
    pub d_alpha: f64,
    pub sigma: f64,
}

/// `(k/l + a/l cosh(r(t-s))/cosh(rt), derivative)` with `l = k + a`, `r = sqrt(l)`.
pub fn cosh_coefficient(k: f64, a: f64, t: f64, s: f64) -> (f64, f64) {
    let l = k + a;
    let r = l.sqrt();
    let g = k / l + a / l * (r * (t - s)).cosh() / (r * t).cosh();
    let dg = -a / l * r * (r * (t - s)).sinh() / (r * t).cosh();
    (g, dg)
}

pub fn oracle_frame(game: &Game, s: f64, mean: f64) -> OracleFrame {
    let t = game.horizon;
    match &game.regime {
        GameRegime::FullConsensus { k, w, n, sigma } => {
            let nw = *n as f64 * w;
            let (g, dg) = cosh_coefficient(*k, nw, t, s);
            OracleFrame {
                weight: nw,
                stubbornness: *k,
                beta: g,
                d_beta: dg,
                alpha: (1.0 - g) * mean,
                d_alpha: -dg * mean,
                sigma: *sigma,
            }
        }
        GameRegime::Leader {
            k_1, w_bar, n, sigma_1, ..
        } => {
            let nw = *n as f64 * w_bar;
            let (g, dg) = cosh_coefficient(*k_1, nw, t, s);
            OracleFrame {
                weight: nw,
                stubbornness: *k_1,
                beta: g,
                d_beta: dg,
                alpha: (1.0 - g) * mean,
                d_alpha: -dg * mean,
                sigma: *sigma_1,
            }
        }
        GameRegime::Follower {
            k_i,
            w_i1,
            sigma,
            x_bar_1,
            drift_sign,
        } => {
            let lt = k_i + w_i1;
            let r = lt.sqrt();
            let xi = w_i1 / lt * (r * (t - s)).cosh() / (r * t).cosh();
            let dxi = -w_i1 / lt * r * (r * (t - s)).sinh() / (r * t).cosh();
            let sign = match drift_sign {
                DriftSign::Plus => 1.0,
                DriftSign::Minus => -1.0,
            };
            OracleFrame {
                weight: *w_i1,
                stubbornness: *k_i,
                beta: k_i / lt + xi,
                d_beta: dxi,
                alpha: (sign * w_i1 / lt - xi) * x_bar_1,
                d_alpha: -dxi * x_bar_1,
                sigma: *sigma,
            }
        }
    }
}

pub struct Case {
    pub game: Game,
    pub st: GameState,
    pub multiplier: MultiplierModel,
}

/// Random admissible game and state of the given regime, with `s` in `(0, t]`.
pub fn random_case(rng: &mut impl Rng, kind: Kind) -> Case {
    let t = rng.random_range(0.5..2.0);
    let h = HParams::new(rng.random_range(0.05..1.0), rng.random_range(0.0..0.5)).unwrap();
    let n: usize = rng.random_range(2..8);
    let regime = match kind {
        Kind::FullConsensus => GameRegime::FullConsensus {
            k: rng.random_range(0.1..3.0),
            w: rng.random_range(0.05..1.0),
            n,
            sigma: rng.random_range(0.0..0.5),
        },
        Kind::Leader => GameRegime::Leader {
            k_1: rng.random_range(0.1..3.0),
            w_bar: rng.random_range(0.05..1.0),
            n,
            sigma_1: rng.random_range(0.0..0.5),
            x_tilde: (0..n - 1).map(|_| rng.random_range(0.0..1.0)).collect(),
        },
        Kind::Follower => GameRegime::Follower {
            k_i: rng.random_range(0.1..3.0),
            w_i1: rng.random_range(0.05..1.0),
            sigma: rng.random_range(0.0..0.5),
            x_bar_1: rng.random_range(0.0..1.0),
            drift_sign: if rng.random_bool(0.5) {
                DriftSign::Plus
            } else {
                DriftSign::Minus
            },
        },
    };
    let mean = regime.fixed_reference().unwrap_or_else(|| rng.random_range(0.0..1.0));
    let game = Game::new(regime, h, t).unwrap();
    let multiplier = MultiplierModel::new(vec![
        rng.random_range(0.8..2.0),
        rng.random_range(-0.2..0.2),
        rng.random_range(-0.05..0.05),
    ])
    .unwrap();
    let s = t * rng.random_range(0.05..1.0);
    let st = GameState::new(
        s,
        rng.random_range(-0.5..1.5),
        rng.random_range(0.0..1.0),
        rng.random_range(0.0..1.0),
        mean,
        rng.random_range(-2.0..2.0),
        &multiplier,
    )
    .unwrap();
    Case { game, st, multiplier }
}

/// Largest `|a_k - b_k|` over the largest `|b_k|`.
pub fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn rk4(mu: impl Fn(f64, f64) -> f64, x0: f64, t: f64, steps: usize) -> Vec<f64> {
    let dt = t / steps as f64;
    let mut x = x0;
    let mut out = vec![x];
    for k in 0..steps {
        let s = k as f64 * dt;
        let k1 = mu(s, x);
        let k2 = mu(s + dt / 2.0, x + dt / 2.0 * k1);
        let k3 = mu(s + dt / 2.0, x + dt / 2.0 * k2);
        let k4 = mu(s + dt, x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        out.push(x);
    }
    out
}

pub fn workspace_file(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}
