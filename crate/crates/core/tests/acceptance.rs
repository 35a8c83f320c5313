//! Acceptance criteria 1-10. Runs as a plain binary so every verdict line is
//! printed; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{oracle_frame, random_case, relative_gap, rk4, workspace_file, Poly, KINDS};
use opinion_game::coefficients::{gamma, gamma_hat, xi_hat, CoefficientParams, HParams, MultiplierModel};
use opinion_game::equilibrium::{
    control_cubic, f_derivatives, feedback_control, opinion_cubic, solve_cubic_real, solve_opinion,
    stationarity_residual, CubicPoly, DriftSign, Game, GameRegime, GameState, RootBranch,
};
use opinion_game::network::{stack_system_matrices, Edge, NetworkSpec};
use opinion_game::scenario::{export_results, load_scenario, run_scenario, simulate_replica, solve_scenario, ScenarioConfig};
use opinion_game::sde::{
    closed_form_linear, opinion_gap_bound_check, simulate_followers, simulate_full_consensus, simulate_leader,
    simulate_linear_em, ClosedFormVariant, FnControl, NoisePaths, TimeGrid,
};
use opinion_game::spectral::{
    fourier_series, round_trip, schrodinger_residual, solve_diffusion_fourier, PdeCoefficients, SpatialGrid, WaveField,
};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn companion_real_roots(c: [f64; 4], imag_tol: f64) -> Vec<f64> {
    let [c3, c2, c1, c0] = c;
    let m = DMatrix::from_row_slice(3, 3, &[-c2 / c3, -c1 / c3, -c0 / c3, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let mut roots: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= imag_tol)
        .map(|z| z.re)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_res = 0.0f64;
    let mut worst_dev = 0.0f64;
    let mut three = 0;
    for trial in 0..1000 {
        let mut c3 = 0.0f64;
        while c3.abs() <= 0.1 {
            c3 = rng.random_range(-10.0..10.0);
        }
        let poly = CubicPoly::new(c3, rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let set = solve_cubic_real(&poly).map_err(|e| format!("trial {trial}: {e}"))?;
        if set.branch == RootBranch::ThreeReal {
            three += 1;
        }
        for &r in &set.roots {
            let res = poly.eval(r).abs() / poly.norm().max(1.0);
            worst_res = worst_res.max(res);
            ensure(res <= 1e-8, || format!("trial {trial}: root {r} residual {res:e}"))?;
        }
        let oracle = companion_real_roots(poly.coefficients(), 1e-7);
        ensure(oracle.len() == set.roots.len(), || {
            format!("trial {trial}: roots {:?} vs eigenvalues {oracle:?}", set.roots)
        })?;
        for (a, b) in set.roots.iter().zip(&oracle) {
            worst_dev = worst_dev.max((a - b).abs());
            ensure((a - b).abs() <= 1e-7, || format!("trial {trial}: root {a} vs eigenvalue {b}"))?;
        }
    }
    Ok(format!(
        "1000 cubics ({three} with three real roots), worst scaled residual {worst_res:.1e}, worst eigenvalue gap {worst_dev:.1e}"
    ))
}

fn f_at(game: &Game, st: &GameState, dx: f64, du: f64) -> f64 {
    f_derivatives(game, &st.with_x(st.x_i + dx).with_u(st.u + du)).unwrap().f
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 4];
    for kind in KINDS {
        for trial in 0..200 {
            let case = random_case(&mut rng, kind);
            let (g, st) = (&case.game, &case.st);
            let d = f_derivatives(g, st).map_err(|e| e.to_string())?;
            let h1 = 1e-5;
            let h2 = 2e-4;
            let fd_x = (f_at(g, st, h1, 0.0) - f_at(g, st, -h1, 0.0)) / (2.0 * h1);
            let fd_u = (f_at(g, st, 0.0, h1) - f_at(g, st, 0.0, -h1)) / (2.0 * h1);
            let fd_xx = (f_at(g, st, h2, 0.0) - 2.0 * d.f + f_at(g, st, -h2, 0.0)) / (h2 * h2);
            let fd_xu = (f_at(g, st, h2, h2) - f_at(g, st, h2, -h2) - f_at(g, st, -h2, h2) + f_at(g, st, -h2, -h2))
                / (4.0 * h2 * h2);
            for (slot, (name, a, fd, tol)) in [
                ("f_x", d.f_x, fd_x, 1e-6),
                ("f_u", d.f_u, fd_u, 1e-6),
                ("f_xu", d.f_xu, fd_xu, 1e-6),
                ("f_xx", d.f_xx, fd_xx, 1e-4),
            ]
            .into_iter()
            .enumerate()
            {
                let rel = (a - fd).abs() / a.abs().max(1.0);
                worst[slot] = worst[slot].max(rel);
                ensure(rel <= tol, || format!("{kind:?} trial {trial}: {name} = {a} vs difference {fd} (rel {rel:e})"))?;
            }
        }
    }
    Ok(format!(
        "600 states, worst relative gaps f_x {:.1e}, f_u {:.1e}, f_xu {:.1e}, f_xx {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

/// Smallest residual found by a uniform scan of `[-span, span]` plus golden
/// section refinement around every local minimum of the scan.
fn search_min_residual(game: &Game, st: &GameState, span: f64) -> f64 {
    let r = |u: f64| stationarity_residual(game, st, u).unwrap_or(f64::INFINITY);
    let n = 4000;
    let us: Vec<f64> = (0..=n).map(|k| -span + 2.0 * span * k as f64 / n as f64).collect();
    let rs: Vec<f64> = us.iter().map(|&u| r(u)).collect();
    let mut best = rs.iter().copied().fold(f64::INFINITY, f64::min);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for k in 1..n {
        if rs[k] <= rs[k - 1] && rs[k] <= rs[k + 1] {
            let (mut a, mut b) = (us[k - 1], us[k + 1]);
            for _ in 0..200 {
                let c = b - phi * (b - a);
                let d = a + phi * (b - a);
                if r(c) < r(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            best = best.min(r(0.5 * (a + b)));
        }
    }
    best
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut states = 0;
    for kind in KINDS {
        for trial in 0..100 {
            let case = random_case(&mut rng, kind);
            let (g, st) = (&case.game, &case.st);
            let u = feedback_control(g, st).map_err(|e| format!("{kind:?} trial {trial}: {e}"))?;
            let res = stationarity_residual(g, st, u).map_err(|e| e.to_string())?;
            worst = worst.max(res);
            ensure(res < 1e-6, || format!("{kind:?} trial {trial}: residual {res:e} at u = {u}"))?;
            let span = 10.0 * u.abs().max(1.0);
            let found = search_min_residual(g, st, span);
            ensure(found >= res - 1e-8, || {
                format!("{kind:?} trial {trial}: search found residual {found:e} below {res:e}")
            })?;
            states += 1;
        }
    }
    Ok(format!("{states} states, worst residual {worst:.1e}, no search improvement beyond 1e-8"))
}

/// `f_u f_xx^2 - 2 f_x f_xu` built by the product rule on
/// `f = P(x, u) + h(x) Q(x, u)`, as a polynomial in `u`.
fn control_oracle(game: &Game, st: &GameState) -> Poly {
    let fr = oracle_frame(game, st.s, st.mean_opt);
    let (s, b, d) = (st.s, game.h.b, game.h.d);
    let (lam, dlam) = (st.lambda.value, st.lambda.d1);
    let x = st.x_i;
    let h = (s * b * x + d).exp();
    let u = Poly::var();
    let drift = Poly::c(fr.beta * x + fr.alpha) - u.clone();
    let q = Poly::c(b * lam * x + dlam + s * s * b * b * fr.sigma * lam) + drift.scale(s * b * lam);
    let q_x = Poly::c(b * lam + s * b * lam * fr.beta);
    let q_u = Poly::c(-s * b * lam);
    let p_x = Poly::c(fr.weight * (x - st.x_j) + fr.stubbornness * (x - st.x0_i));
    let p_xx = Poly::c(fr.weight + fr.stubbornness);
    let sb = s * b;
    let f_x = p_x + (q.scale(sb) + q_x.clone()).scale(h);
    let f_xx = p_xx + (q.scale(sb * sb) + q_x.scale(2.0 * sb)).scale(h);
    let f_u = u + q_u.scale(h);
    let f_xu = q_u.scale(sb * h);
    f_u * f_xx.clone() * f_xx - (f_x * f_xu).scale(2.0)
}

/// Optimal-opinion condition with `b h` replaced by `b e + s b^2 x`, brace
/// written term by term, as a polynomial in `x`.
fn opinion_oracle(game: &Game, st: &GameState) -> Poly {
    let fr = oracle_frame(game, st.s, st.mean_opt);
    let (s, b, e) = (st.s, game.h.b, 1.0 + game.h.d);
    let (lam, dl, ddl) = (st.lambda.value, st.lambda.d1, st.lambda.d2);
    let (beta, dbeta, alpha, dalpha, sig, u) = (fr.beta, fr.d_beta, fr.alpha, fr.d_alpha, fr.sigma, st.u);
    let x = Poly::var;
    let c = Poly::c;
    let drift = x().scale(beta) + c(alpha - u);
    let bracket = x().scale(s * b * lam * (1.0 + s * beta))
        + c(lam + s * dl + s * s * b * lam * (alpha - u) + s * lam * (beta + s * s * b * sig));
    let brace = x().scale(2.0 * lam)
        + x() * x().scale(s * b * b * lam)
        + c(s * ddl)
        + (c(1.0) + x().scale(s * b)).scale(dl)
        + drift.scale((1.0 + s * s * b + b + s * b) * dl)
        + (c(s * dl + lam) + x().scale(s * lam)).scale(beta)
        + (c(dbeta) + (x().scale(dbeta) + c(dalpha)).scale(s * b)).scale(s * lam)
        + (c(3.0 * lam + dl) + x().scale(lam * s * b)).scale(sig * s * s * b * b)
        - bracket;
    let outer = c(b * e) + x().scale(s * b * b);
    outer * brace - x().scale(fr.weight + fr.stubbornness) + c(fr.weight * st.x_j + fr.stubbornness * st.x0_i)
}

fn descending(p: &Poly) -> [f64; 4] {
    [p.coeff(3), p.coeff(2), p.coeff(1), p.coeff(0)]
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_u, mut worst_x) = (0.0f64, 0.0f64);
    for kind in KINDS {
        for trial in 0..100 {
            let case = random_case(&mut rng, kind);
            let (g, st) = (&case.game, &case.st);
            let cu = control_cubic(g, st).map_err(|e| e.to_string())?.coefficients();
            let ou = control_oracle(g, st);
            ensure(ou.0.len() <= 4, || "control oracle degree above 3".into())?;
            let gap = relative_gap(&cu, &descending(&ou));
            worst_u = worst_u.max(gap);
            ensure(gap <= 1e-10, || format!("{kind:?} trial {trial}: control {cu:?} vs {:?}", descending(&ou)))?;

            let cx = opinion_cubic(g, st).map_err(|e| e.to_string())?.coefficients();
            let ox = opinion_oracle(g, st);
            ensure(ox.0.len() <= 4, || "opinion oracle degree above 3".into())?;
            let gap = relative_gap(&cx, &descending(&ox));
            worst_x = worst_x.max(gap);
            ensure(gap <= 1e-10, || format!("{kind:?} trial {trial}: opinion {cx:?} vs {:?}", descending(&ox)))?;
        }
    }
    Ok(format!("300 states, worst relative gap control {worst_u:.1e}, opinion {worst_x:.1e}"))
}

fn criterion_5() -> Verdict {
    let mut instances = 0;
    let mut cases = 0;
    let multiplier = MultiplierModel::constant(1.0);
    for b in [0.1, 0.3, 0.6, 1.0, 2.0] {
        for s in [0.1, 0.5, 0.9] {
            for k_1 in [0.5, 2.0, 5.0] {
                for w_bar in [0.1, 0.5] {
                    for (x0, x_tilde) in [(0.6, vec![0.45, 0.5, 0.55]), (0.2, vec![0.7, 0.8, 0.9])] {
                        cases += 1;
                        let game = Game::new(
                            GameRegime::Leader {
                                k_1,
                                w_bar,
                                n: 4,
                                sigma_1: 0.05,
                                x_tilde: x_tilde.clone(),
                            },
                            HParams::new(b, 0.1).unwrap(),
                            1.0,
                        )
                        .unwrap();
                        let mean = x_tilde.iter().sum::<f64>() / 3.0;
                        let st = GameState::new(s, x0, mean, x0, mean, 0.0, &multiplier).unwrap();
                        let poly = opinion_cubic(&game, &st).map_err(|e| e.to_string())?;
                        let set = solve_cubic_real(&poly).map_err(|e| e.to_string())?;
                        if set.branch != RootBranch::ThreeReal {
                            continue;
                        }
                        instances += 1;
                        let chosen = solve_opinion(&game, &st).map_err(|e| e.to_string())?.x;
                        let oracle = companion_real_roots(poly.coefficients(), 1e-9);
                        let top = *oracle.last().unwrap();
                        ensure(oracle.len() == 3, || format!("b={b} s={s}: eigenvalues {oracle:?}"))?;
                        ensure(chosen == set.max() && (chosen - top).abs() <= 1e-7 * top.abs().max(1.0), || {
                            format!("b={b} s={s} k_1={k_1} w_bar={w_bar}: chose {chosen}, roots {:?}", set.roots)
                        })?;
                    }
                }
            }
        }
    }
    ensure(instances >= 20, || format!("only {instances} three-root instances in {cases} cases"))?;
    Ok(format!("{instances} three-real-root instances out of {cases}; the maximum was selected in each"))
}

fn smooth_control(_: usize, s: f64, x: f64) -> f64 {
    0.2 * (2.0 * s).cos() + 0.1 * x
}

fn linear_em_slope() -> Result<(f64, Vec<f64>), String> {
    let spec = NetworkSpec {
        n: 3,
        edges: vec![Edge::new(1, 2, 0.4), Edge::new(2, 3, 0.3), Edge::new(3, 1, 0.5)],
        stubbornness: vec![1.0, 0.5, 2.0],
        leader: None,
    };
    let mu = DMatrix::from_row_slice(3, 3, &[-0.5, 0.2, 0.0, 0.1, -0.8, 0.3, 0.0, 0.2, -0.4]);
    let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![0.3, 0.2, 0.4]));
    let sm = stack_system_matrices(&spec, &mu, &sigma).map_err(|e| e.to_string())?;
    let x0 = DVector::from_vec(vec![0.2, 0.5, 0.9, 0.0, 0.0, 0.0]);
    let coarse = [100usize, 200, 400, 800];
    let fine_steps = 800 * 16;
    let fine = TimeGrid::new(1.0, fine_steps).unwrap();
    let replicas = 20;
    let mut errs = vec![0.0; coarse.len()];
    for r in 0..replicas {
        let noise = NoisePaths::generate(99, r, 3, fine);
        let reference = closed_form_linear(&sm, &x0, &fine, &noise, ClosedFormVariant::default()).map_err(|e| e.to_string())?;
        for (slot, &steps) in coarse.iter().enumerate() {
            let factor = fine_steps / steps;
            let cn = noise.coarsen(factor).map_err(|e| e.to_string())?;
            let em = simulate_linear_em(&sm, &x0, &cn.grid, &cn).map_err(|e| e.to_string())?;
            let err = (0..=steps).map(|k| (&em[k] - &reference[k * factor]).norm()).fold(0.0, f64::max);
            errs[slot] += err / replicas as f64;
        }
    }
    let pts: Vec<(f64, f64)> = coarse.iter().zip(&errs).map(|(&n, &e)| ((1.0 / n as f64).ln(), e.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Ok((slope, errs))
}

fn criterion_6() -> Verdict {
    let t = 1.0;
    let steps = 10_000;
    let ds = t / steps as f64;
    let grid = TimeGrid::new(t, steps).unwrap();
    let h = HParams::new(0.3, 0.1).unwrap();
    let policy = FnControl(smooth_control);
    let mut worst = 0.0f64;

    let fc = Game::new(GameRegime::FullConsensus { k: 1.0, w: 0.3, n: 4, sigma: 0.0 }, h, t).unwrap();
    let x0 = [0.2, 0.4, 0.6, 0.8];
    let profile = [0.4, 0.5, 0.6];
    let path = simulate_full_consensus(&fc, &policy, &profile, &x0, &grid, &NoisePaths::zero(4, grid))
        .map_err(|e| e.to_string())?;
    for (i, &start) in x0.iter().enumerate() {
        let mu = |s: f64, x: f64| {
            let (g, _) = common::cosh_coefficient(1.0, 1.2, t, s);
            0.5 + g * (x - 0.5) - smooth_control(i, s, x)
        };
        let exact = rk4(mu, start, t, steps);
        let err = exact.iter().zip(&path.opinions[i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        ensure(err <= 2.0 * ds, || format!("full consensus agent {}: error {err:e}", i + 1))?;
    }

    let x_tilde = vec![0.3, 0.5, 0.7];
    let leader = Game::new(
        GameRegime::Leader { k_1: 0.5, w_bar: 0.1, n: 4, sigma_1: 0.0, x_tilde },
        h,
        t,
    )
    .unwrap();
    let path = simulate_leader(&leader, &policy, 0.6, &grid, &NoisePaths::zero(1, grid)).map_err(|e| e.to_string())?;
    let mu = |s: f64, x: f64| {
        let (g, _) = common::cosh_coefficient(0.5, 0.4, t, s);
        0.5 + g * (x - 0.5) - smooth_control(0, s, x)
    };
    let exact = rk4(mu, 0.6, t, steps);
    let err = exact.iter().zip(&path.opinions[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    worst = worst.max(err);
    ensure(err <= 2.0 * ds, || format!("leader: error {err:e}"))?;

    let x_bar = 0.55;
    let specs = [(1.5, 0.4, DriftSign::Plus), (0.8, 0.2, DriftSign::Minus), (2.0, 0.0, DriftSign::Plus)];
    let games: Vec<Game> = specs
        .iter()
        .map(|&(k_i, w_i1, drift_sign)| {
            Game::new(GameRegime::Follower { k_i, w_i1, sigma: 0.0, x_bar_1: x_bar, drift_sign }, h, t).unwrap()
        })
        .collect();
    let fx0 = [0.3, 0.5, 0.7];
    let path = simulate_followers(&games, &policy, &fx0, &grid, &NoisePaths::zero(3, grid)).map_err(|e| e.to_string())?;
    for (i, &(k, w, sign)) in specs.iter().enumerate() {
        let sgn = if sign == DriftSign::Plus { 1.0 } else { -1.0 };
        let lt = k + w;
        let r = lt.sqrt();
        let mu = |s: f64, x: f64| {
            let xi = w / lt * (r * (t - s)).cosh() / (r * t).cosh();
            (k * x + sgn * w * x_bar) / lt + xi * (x - x_bar) - smooth_control(i, s, x)
        };
        let exact = rk4(mu, fx0[i], t, steps);
        let err = exact.iter().zip(&path.opinions[i]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        ensure(err <= 2.0 * ds, || format!("follower {}: error {err:e}", i + 1))?;
    }

    let (slope, errs) = linear_em_slope()?;
    ensure(slope >= 0.9, || format!("EM slope {slope:.3} from errors {errs:?}"))?;
    Ok(format!(
        "deterministic reductions within {worst:.1e} (bound {:.0e}); EM strong slope {slope:.3}",
        2.0 * ds
    ))
}

fn gap_config(i: usize) -> String {
    let fc = |k: f64, w: f64, sigma: f64, b: f64| {
        format!(
            r#"name = "gap{i}"
[network]
n = 4
stubbornness = [{k}, {k}, {k}, {k}]
edges = [{{ from = 1, to = 2, w = {w} }}, {{ from = 2, to = 3, w = {w} }}, {{ from = 3, to = 4, w = {w} }}, {{ from = 4, to = 1, w = {w} }}]
[agents]
x0 = [0.1, 0.35, 0.6, 0.9]
[regime]
kind = "full_consensus"
k = {k}
w = {w}
sigma = {sigma}
[h_params]
b = {b}
d = 0.1
[grid]
t = 1.0
steps = 400
[monte_carlo]
replicas = 34
seed = {seed}
"#,
            seed = 1000 + i
        )
    };
    let leader = |k: f64, w: f64, sigma: f64| {
        format!(
            r#"name = "gap{i}"
[network]
n = 4
leader = 1
stubbornness = [0.5, {k}, {k}, {k}]
edges = [{{ from = 2, to = 1, w = {w} }}, {{ from = 3, to = 1, w = {w} }}, {{ from = 4, to = 1, w = {w} }}]
[agents]
x0 = [0.6, 0.2, 0.5, 0.8]
[regime]
kind = "leader"
w_bar = 0.1
sigma_1 = 0.05
sigma = {sigma}
x_star = [0.45, 0.5, 0.55]
[h_params]
b = 1.0
d = 0.1
[grid]
t = 1.0
steps = 400
[monte_carlo]
replicas = 67
seed = {seed}
"#,
            seed = 1000 + i
        )
    };
    match i {
        0 => fc(2.0, 0.3, 0.05, 0.3),
        1 => fc(0.5, 0.8, 0.2, 0.3),
        2 => fc(3.0, 0.2, 0.4, 0.5),
        3 => leader(1.5, 0.4, 0.05),
        _ => leader(0.8, 0.2, 0.3),
    }
}

fn criterion_7() -> Verdict {
    let (mut pairs, mut running, mut full) = (0usize, 0usize, 0usize);
    for set in 0..5 {
        let cfg = ScenarioConfig::parse(&gap_config(set)).map_err(|e| format!("set {set}: {e}"))?;
        let solved = solve_scenario(&cfg).map_err(|e| e.to_string())?;
        let n = cfg.network.n;
        for r in 0..cfg.monte_carlo.replicas {
            let (path, noise) = simulate_replica(&cfg, &solved, r).map_err(|e| e.to_string())?;
            for i in 0..n {
                for j in i + 1..n {
                    if solved.games[i] != solved.games[j] || solved.references[i] != solved.references[j] {
                        continue;
                    }
                    let rep = opinion_gap_bound_check(&path, i, j, &solved.games[i], solved.references[i].1, &noise)
                        .map_err(|e| e.to_string())?;
                    pairs += 1;
                    running += rep.holds_running as usize;
                    full += rep.holds as usize;
                }
            }
        }
    }
    ensure(pairs >= 1000, || format!("only {pairs} pairs"))?;
    let rate = running as f64 / pairs as f64;
    let full_rate = full as f64 / pairs as f64;
    ensure(running == pairs, || format!("running bound held on {running}/{pairs} pairs"))?;
    Ok(format!(
        "{pairs} pairs over 5 parameter sets, pass rate {:.1}% (whole-horizon integrals: {:.1}%)",
        100.0 * rate,
        100.0 * full_rate
    ))
}

fn criterion_8() -> Verdict {
    let sets = [(2.0, 0.3, 4usize, 1.0), (0.1, 2.0, 10, 5.0), (5.0, 0.01, 2, 0.5), (0.0, 1.0, 3, 3.0), (1e-3, 50.0, 20, 2.0)];
    let n_grid = 10_000;
    for &(k, w, n, t) in &sets {
        let p = CoefficientParams { k, w, w_bar: w, k_1: k, w_i1: w, n, t };
        for (name, f) in [("gamma", gamma as fn(f64, &CoefficientParams) -> _), ("gamma_hat", gamma_hat)] {
            let v0 = f(0.0, &p).map_err(|e| e.to_string())?;
            ensure((v0 - 1.0).abs() <= 1e-14, || format!("{name}(0) = {v0} for {p:?}"))?;
            let mut prev = v0;
            for j in 1..=n_grid {
                let v = f(t * j as f64 / n_grid as f64, &p).map_err(|e| e.to_string())?;
                ensure(v <= prev, || format!("{name} increases at step {j} for {p:?}"))?;
                prev = v;
            }
        }
        let xi0 = xi_hat(0.0, &p).map_err(|e| e.to_string())?;
        ensure(xi0 == w / (k + w), || format!("xi_hat(0) = {xi0}, expected {}", w / (k + w)))?;
        let mut prev = xi0;
        for j in 1..=n_grid {
            let v = xi_hat(t * j as f64 / n_grid as f64, &p).map_err(|e| e.to_string())?;
            ensure(v <= prev, || format!("xi_hat increases at step {j} for {p:?}"))?;
            prev = v;
        }
    }
    Ok(format!("{} parameter sets, {n_grid}-point grids", sets.len()))
}

fn criterion_9() -> Verdict {
    let grid = SpatialGrid::new(-30.0, 30.0, 2048).map_err(|e| e.to_string())?;
    let var0 = 1.0;
    let initial = WaveField::gaussian(grid, 0.5, var0).map_err(|e| e.to_string())?;
    let heat = PdeCoefficients::constant(grid, 0.0, 0.0, 1.0).map_err(|e| e.to_string())?;
    let mut worst_var = 0.0f64;
    for s in [0.25, 1.0, 4.0] {
        let out = solve_diffusion_fourier(&heat, &initial, s).map_err(|e| e.to_string())?;
        let (_, var) = out.moments();
        let rel = (var - (var0 + 2.0 * s)).abs() / (var0 + 2.0 * s);
        worst_var = worst_var.max(rel);
        ensure(rel <= 1e-3, || format!("variance {var} at s = {s}, expected {}", var0 + 2.0 * s))?;
    }

    let trip = round_trip(&initial).max_abs_diff(&initial);
    ensure(trip < 1e-12, || format!("round trip error {trip:e}"))?;

    let general = PdeCoefficients::constant(grid, -0.2, 0.5, 0.5).map_err(|e| e.to_string())?;
    let once = solve_diffusion_fourier(&general, &initial, 1.0).map_err(|e| e.to_string())?;
    let half = solve_diffusion_fourier(&general, &initial, 0.4).map_err(|e| e.to_string())?;
    let twice = solve_diffusion_fourier(&general, &half, 0.6).map_err(|e| e.to_string())?;
    let semi = once.max_abs_diff(&twice);
    ensure(semi <= 1e-10, || format!("semigroup error {semi:e}"))?;

    let mut res = Vec::new();
    for parts in [8usize, 16, 32] {
        let series = fourier_series(&general, &initial, 1.0 / parts as f64, parts + 1).map_err(|e| e.to_string())?;
        res.push(schrodinger_residual(&series, &general).map_err(|e| e.to_string())?);
    }
    let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(orders.iter().all(|&p| (1.8..=2.2).contains(&p)), || {
        format!("residuals {res:?} give orders {orders:?}")
    })?;
    Ok(format!(
        "variance law within {:.1e}, round trip {trip:.1e}, semigroup {semi:.1e}, residual orders {:.2}, {:.2}",
        worst_var, orders[0], orders[1]
    ))
}

fn criterion_10() -> Verdict {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for name in ["full_consensus", "leader"] {
        let cfg = load_scenario(workspace_file(&format!("scenarios/{name}.toml"))).map_err(|e| e.to_string())?;
        let mut runs = Vec::new();
        for run in 0..2 {
            let dir = root.path().join(format!("{name}-{run}"));
            let summary = run_scenario(&cfg).map_err(|e| e.to_string())?;
            let written = export_results(&summary, &cfg, &dir).map_err(|e| e.to_string())?;
            let blobs: Vec<(String, Vec<u8>)> = written
                .iter()
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
                .collect();
            runs.push(blobs);
        }
        ensure(runs[0] == runs[1], || format!("{name}: exports differ"))?;
        files += runs[0].len();
    }
    Ok(format!("both shipped scenarios, {files} files byte-identical across two runs"))
}

fn main() {
    let criteria: [(usize, &str, fn() -> Verdict, Option<f64>); 10] = [
        (1, "cubic solver soundness", criterion_1, Some(1.0)),
        (2, "derivative fidelity", criterion_2, Some(5.0)),
        (3, "stationarity", criterion_3, None),
        (4, "cubic-coefficient identity", criterion_4, None),
        (5, "leader max rule", criterion_5, None),
        (6, "SDE convergence", criterion_6, Some(30.0)),
        (7, "gap bound", criterion_7, None),
        (8, "coefficient functions", criterion_8, None),
        (9, "spectral module", criterion_9, None),
        (10, "reproducibility", criterion_10, None),
    ];
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let mut verdict = run();
        let secs = start.elapsed().as_secs_f64();
        if let (Ok(detail), Some(limit)) = (&verdict, limit) {
            if secs >= limit {
                verdict = Err(format!("{detail}; took {secs:.2}s, limit {limit}s"));
            }
        }
        match verdict {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 10 criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
