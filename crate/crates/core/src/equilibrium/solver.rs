use serde::Serialize;

use super::cubic::{solve_cubic_real, solve_reduced_real, CubicPoly, RootSet};
use super::regime::{Frame, Game, GameRegime, GameState};
use crate::coefficients::h_exact;
use crate::error::{Error, Result};

/// Residual below which a control root counts as stationary.
pub const STATIONARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivBundle {
    pub f: f64,
    pub f_x: f64,
    pub f_xx: f64,
    pub f_u: f64,
    pub f_xu: f64,
    /// `f_x` with its `u` dependence removed: `f_x = a1 - C3 u`.
    pub a1: f64,
    /// `f_xx = a2 - C2 u`.
    pub a2: f64,
    pub h: f64,
}

/// `C1 = s b lambda h`, `C2 = (s b)^3 lambda h`, `C3 = (s b)^2 lambda h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlCollectors {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Pieces of the optimal-opinion condition
/// `b h(s, x) (q2 x^2 + q1 x + q0) = (W + K) x - a3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpinionCollectors {
    pub q2: f64,
    pub q1: f64,
    pub q0: f64,
    pub a3: f64,
    pub a4: f64,
    pub stiffness: f64,
}

struct Eval {
    frame: Frame,
    b: f64,
    s: f64,
    lam: f64,
    dlam: f64,
    h: f64,
}

fn prepare(game: &Game, st: &GameState) -> Result<Eval> {
    st.checked(game.horizon)?;
    Ok(Eval {
        frame: game.frame(st)?,
        b: game.h.b,
        s: st.s,
        lam: st.lambda.value,
        dlam: st.lambda.d1,
        h: h_exact(st.s, st.x_i, &game.h)?,
    })
}

/// `f` and its partials in `x` and `u` at the state.
pub fn f_derivatives(game: &Game, st: &GameState) -> Result<DerivBundle> {
    let Eval {
        frame: fr,
        b,
        s,
        lam,
        dlam,
        h,
    } = prepare(game, st)?;
    let (x, u) = (st.x_i, st.u);
    let drift = fr.drift(x, u);
    let sig = fr.sigma;

    let f = 0.5 * fr.weight * (x - st.x_j).powi(2)
        + 0.5 * fr.stubbornness * (x - st.x0_i).powi(2)
        + 0.5 * u * u
        + b * lam * x * h
        + dlam * h
        + s * b * lam * h * drift
        + s * s * b * b * sig * lam * h;

    let brace = lam + s * b * lam * x + s * dlam + s * s * b * lam * drift + s * lam * fr.beta
        + s.powi(3) * b * b * sig * lam;
    let f_x = fr.weight * (x - st.x_j) + fr.stubbornness * (x - st.x0_i) + b * h * brace;
    let f_xx = fr.weight
        + fr.stubbornness
        + s * b * b * h * brace
        + s * b * b * lam * (1.0 + s * fr.beta) * h;
    let cc = collectors_from(s, b, lam, h);
    Ok(DerivBundle {
        f,
        f_x,
        f_xx,
        f_u: u - cc.c1,
        f_xu: -cc.c3,
        a1: f_x + cc.c3 * u,
        a2: f_xx + cc.c2 * u,
        h,
    })
}

fn collectors_from(s: f64, b: f64, lam: f64, h: f64) -> ControlCollectors {
    let sb = s * b;
    ControlCollectors {
        c1: sb * lam * h,
        c2: sb.powi(3) * lam * h,
        c3: sb * sb * lam * h,
    }
}

pub fn control_collectors(game: &Game, st: &GameState) -> Result<ControlCollectors> {
    let e = prepare(game, st)?;
    Ok(collectors_from(e.s, e.b, e.lam, e.h))
}

/// `f_u f_xx^2 - 2 f_x f_xu` as a cubic in `u`, with `x` held at the state.
pub fn control_cubic(game: &Game, st: &GameState) -> Result<CubicPoly> {
    let d = f_derivatives(game, st)?;
    let ControlCollectors { c1, c2, c3 } = control_collectors(game, st)?;
    let (a1, a2) = (d.a1, d.a2);
    Ok(CubicPoly::new(
        c2 * c2,
        -c2 * (2.0 * a2 + c1 * c2),
        a2 * a2 + 2.0 * a2 * c1 * c2 - 2.0 * c3 * c3,
        2.0 * a1 * c3 - c1 * a2 * a2,
    ))
}

/// `|f_u f_xx^2 - 2 f_x f_xu|` at the state with its control replaced by `u`.
pub fn stationarity_residual(game: &Game, st: &GameState, u: f64) -> Result<f64> {
    let d = f_derivatives(game, &st.with_u(u))?;
    Ok((d.f_u * d.f_xx * d.f_xx - 2.0 * d.f_x * d.f_xu).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSolution {
    pub u: f64,
    pub residual: f64,
    /// Every real root of the control polynomial.
    pub roots: Vec<f64>,
}

/// Feedback control at the state: among the real roots that satisfy
/// stationarity, the one with the smallest running cost.
///
/// At `s = 0` the cubic collapses to `f_xx^2 u = 0` and the result is `u = 0`.
pub fn solve_control(game: &Game, st: &GameState) -> Result<ControlSolution> {
    let poly = control_cubic(game, st)?;
    let roots = solve_reduced_real(poly.coefficients())?;
    let mut best: Option<(f64, f64)> = None;
    let mut best_residual = f64::INFINITY;
    for &u in &roots {
        let r = stationarity_residual(game, st, u)?;
        best_residual = best_residual.min(r);
        if r >= STATIONARITY_TOL {
            continue;
        }
        // the x-dependent part of the running cost is common to all roots
        let better = match best {
            None => true,
            Some((bu, br)) => u.abs() < bu.abs() || (u.abs() == bu.abs() && r < br),
        };
        if better {
            best = Some((u, r));
        }
    }
    match best {
        Some((u, residual)) => Ok(ControlSolution { u, residual, roots }),
        None => Err(Error::StationarityFailure { best_residual, roots }),
    }
}

pub fn feedback_control(game: &Game, st: &GameState) -> Result<f64> {
    solve_control(game, st).map(|c| c.u)
}

pub fn opinion_collectors(game: &Game, st: &GameState) -> Result<OpinionCollectors> {
    st.checked(game.horizon)?;
    let fr = game.frame(st)?;
    let (s, b) = (st.s, game.h.b);
    let (lam, dl, ddl) = (st.lambda.value, st.lambda.d1, st.lambda.d2);
    let (beta, dbeta, alpha, dalpha, sig) = (fr.beta, fr.d_beta, fr.alpha, fr.d_alpha, fr.sigma);
    let au = alpha - st.u;
    let p = 1.0 + s * s * b + b + s * b;

    let q2 = s * b * b * lam;
    let q1 = 2.0 * lam + s * b * dl + p * dl * beta + s * beta * lam + s * s * b * lam * dbeta
        + sig * s.powi(3) * b.powi(3) * lam
        - s * b * lam
        - s * s * b * lam * beta;
    let a4 = lam + s * dl + s * s * b * lam * au + s * lam * (beta + s * s * b * sig);
    let q0 = s * ddl + dl + p * dl * au + s * beta * dl + beta * lam + s * lam * dbeta
        + s * s * b * lam * dalpha
        + sig * s * s * b * b * (3.0 * lam + dl)
        - a4;
    Ok(OpinionCollectors {
        q2,
        q1,
        q0,
        a3: fr.weight * st.x_j + fr.stubbornness * st.x0_i,
        a4,
        stiffness: fr.weight + fr.stubbornness,
    })
}

/// The opinion condition with exact `h`, as a function of the own opinion `x`.
pub fn opinion_residual(game: &Game, st: &GameState, x: f64) -> Result<f64> {
    let oc = opinion_collectors(game, st)?;
    let h = h_exact(st.s, x, &game.h)?;
    Ok(game.h.b * h * ((oc.q2 * x + oc.q1) * x + oc.q0) - (oc.stiffness * x - oc.a3))
}

/// The opinion condition with `h ≈ e + s b x`, collected in powers of `x`.
pub fn opinion_cubic(game: &Game, st: &GameState) -> Result<CubicPoly> {
    let oc = opinion_collectors(game, st)?;
    let (s, b, e) = (st.s, game.h.b, game.h.e());
    let sb2 = s * b * b;
    let be = b * e;
    let poly = CubicPoly::new(
        sb2 * oc.q2,
        be * oc.q2 + sb2 * oc.q1,
        be * oc.q1 + sb2 * oc.q0 - oc.stiffness,
        be * oc.q0 + oc.a3,
    );
    if poly.c3 == 0.0 {
        return Err(Error::DegenerateCubic { leading: poly.c3 });
    }
    Ok(poly)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpinionSolution {
    pub x: f64,
    /// Opinion condition residual with exact `h` at `x`.
    pub residual: f64,
    pub roots: RootSet,
}

/// Optimal opinion: the leader takes the largest real root; everyone else
/// the root that best satisfies the exact (unlinearized) condition.
pub fn solve_opinion(game: &Game, st: &GameState) -> Result<OpinionSolution> {
    let roots = solve_cubic_real(&opinion_cubic(game, st)?)?;
    let x = match game.regime {
        GameRegime::Leader { .. } => roots.max(),
        _ => {
            let mut best = (roots.roots[0], f64::INFINITY);
            for &r in &roots.roots {
                let res = opinion_residual(game, st, r)?.abs();
                if res < best.1 {
                    best = (r, res);
                }
            }
            best.0
        }
    };
    Ok(OpinionSolution {
        x,
        residual: opinion_residual(game, st, x)?,
        roots,
    })
}

pub fn optimal_opinion(game: &Game, st: &GameState) -> Result<f64> {
    solve_opinion(game, st).map(|o| o.x)
}
