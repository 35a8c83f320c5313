use serde::Serialize;

use super::config::{RegimeConfig, ScenarioConfig};
use super::run::{run_with, solve_scenario, EnsembleSummary, Solved};
use crate::coefficients::CoshProfile;
use crate::equilibrium::{f_derivatives, stationarity_residual, GameRegime, STATIONARITY_TOL};
use crate::error::Result;
use crate::spectral::{
    fourier_series, schrodinger_residual, solve_diffusion_fourier, transition_wave, wick_rhs, PdeCoefficients,
    WaveField,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn profile_checks(report: &mut VerifyReport, label: &str, p: &CoshProfile, start: f64, horizon: f64) -> Result<()> {
    let v0 = p.value(0.0)?;
    report.push(
        &format!("{label}(0)"),
        (v0 - start).abs() <= 1e-14,
        format!("{label}(0) = {v0}, expected {start}"),
    );
    let n = 10_000;
    let mut prev = v0;
    let mut worst = 0.0f64;
    for k in 1..=n {
        let v = p.value(horizon * k as f64 / n as f64)?;
        worst = worst.max(v - prev);
        prev = v;
    }
    report.push(
        &format!("{label} nonincreasing"),
        worst <= 0.0,
        format!("largest increase {worst:e} over {n} steps"),
    );
    Ok(())
}

/// Invariant suite for one scenario: coefficient shapes, stationarity of the
/// solved controls, leader wiring, the opinion-gap bound on every replica, and
/// a bit-exact rerun.
pub fn verify_scenario(cfg: &ScenarioConfig) -> Result<(VerifyReport, EnsembleSummary)> {
    let mut report = VerifyReport { checks: Vec::new() };
    report.push("network", cfg.network.validate().is_empty(), cfg.network.validate().to_string());

    let solved = solve_scenario(cfg)?;
    let t = cfg.grid.t;
    for (i, g) in solved.games.iter().enumerate() {
        let cp = g.regime.coefficient_params(t);
        match &g.regime {
            GameRegime::FullConsensus { .. } if i == 0 => profile_checks(&mut report, "gamma", &cp.gamma_profile()?, 1.0, t)?,
            GameRegime::Leader { .. } => profile_checks(&mut report, "gamma_hat", &cp.gamma_hat_profile()?, 1.0, t)?,
            GameRegime::Follower { .. } => {
                let xi = cp.xi_hat_profile()?;
                let start = cp.w_i1 / cp.lambda_tilde();
                profile_checks(&mut report, &format!("xi_hat[{}]", i + 1), &xi, start, t)?
            }
            _ => {}
        }
    }

    let eq = &solved.profile;
    let mut worst = 0.0f64;
    for (i, g) in solved.games.iter().enumerate() {
        worst = worst.max(stationarity_residual(g, &solved.states[i], eq.phi_star[i])?.abs());
    }
    report.push(
        "stationarity",
        worst < STATIONARITY_TOL,
        format!("largest |f_u f_xx^2 - 2 f_x f_xu| = {worst:e}"),
    );

    if let (RegimeConfig::Leader { .. }, Some(x_bar), Some(roots)) = (&cfg.regime, eq.x_bar_1, &eq.leader_roots) {
        let max = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let wired = solved.references.iter().enumerate().all(|(i, r)| i == cfg.leader_index() || r.0 == x_bar);
        report.push(
            "leader max root",
            x_bar == max && wired,
            format!("x_bar_1 = {x_bar}, roots {roots:?}"),
        );
    }

    let summary = run_with(cfg, &solved)?;
    report.push(
        "gap bound",
        summary.gap_pass_rate == 1.0,
        format!("pass rate {} over {} pairs", summary.gap_pass_rate, summary.gap_pairs),
    );
    let again = run_with(cfg, &solved)?;
    report.push(
        "reproducible",
        again == summary,
        "second run compared field by field".into(),
    );
    Ok((report, summary))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeDemo {
    pub initial: WaveField,
    /// Heat flow with diffusion equal to the first agent's `sigma`.
    pub heat: WaveField,
    /// `I exp(s v(x, u*))` with `v` from the first agent's `f` at its equilibrium control.
    pub transition: WaveField,
    /// Residual of the heat series at time spacings `s / 32` and `s / 64`.
    pub residuals: [f64; 2],
}

pub fn pde_demo(cfg: &ScenarioConfig, solved: &Solved) -> Result<PdeDemo> {
    let grid = cfg.pde_grid()?;
    let s = cfg.pde.s;
    let initial = WaveField::gaussian(grid, cfg.agents.x0[0], cfg.pde.variance)?;
    let game = &solved.games[0];
    let heat_c = PdeCoefficients::constant(grid, 0.0, 0.0, game.regime.diffusion())?;
    let heat = solve_diffusion_fourier(&heat_c, &initial, s)?;

    let st = solved.states[0].with_u(solved.profile.phi_star[0]);
    let v = grid
        .points()
        .into_iter()
        .map(|x| wick_rhs(&f_derivatives(game, &st.with_x(x))?))
        .collect::<Result<Vec<_>>>()?;
    let transition = transition_wave(&initial, &v, s)?;

    let mut residuals = [0.0; 2];
    for (slot, parts) in [32usize, 64].into_iter().enumerate() {
        let ds = if s > 0.0 { s / parts as f64 } else { 1.0 / parts as f64 };
        let series = fourier_series(&heat_c, &initial, ds, parts + 1)?;
        residuals[slot] = schrodinger_residual(&series, &heat_c)?;
    }
    Ok(PdeDemo {
        initial,
        heat,
        transition,
        residuals,
    })
}
