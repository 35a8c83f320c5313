use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use opinion_game::scenario::{
    equilibrium_csv, export_results, field_csv, load_scenario, pde_demo, run_scenario, solve_scenario,
    verify_scenario, write_files, ScenarioConfig,
};

/// Overrides the output directory named in the config.
const OUT_ENV: &str = "OPINION_GAME_OUT";

#[derive(Parser)]
#[command(name = "opinion-game", version, about = "Stochastic opinion-dynamics games on weighted networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; beats $OPINION_GAME_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium profile only.
    Solve(Common),
    /// Equilibrium, Monte Carlo ensemble and exports.
    Simulate(Common),
    /// Invariant and bound suite; exits non-zero on any failure.
    Verify(Common),
    /// Transition-function and diffusion demos on a spatial grid.
    Pde(Common),
}

fn out_dir(c: &Common, cfg: &ScenarioConfig) -> PathBuf {
    c.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.outputs.directory))
}

fn load(c: &Common) -> Result<(ScenarioConfig, PathBuf)> {
    let cfg = load_scenario(&c.config)?;
    let dir = out_dir(c, &cfg);
    Ok((cfg, dir))
}

fn listed(paths: &[PathBuf], dir: &Path) {
    println!("wrote {} files to {}", paths.len(), dir.display());
}

fn solve(c: &Common) -> Result<()> {
    let (cfg, dir) = load(c)?;
    let solved = solve_scenario(&cfg)?;
    let eq = &solved.profile;
    println!("{} ({}), decision time {}", cfg.name, cfg.regime.kind(), eq.decision_time);
    if let Some(x) = eq.x_bar_1 {
        println!("leader commits to {x} (roots {:?})", eq.leader_roots.as_deref().unwrap_or_default());
    }
    println!("{:>5} {:>22} {:>22}", "agent", "x*", "phi*");
    for (i, (x, u)) in eq.x_star.iter().zip(&eq.phi_star).enumerate() {
        println!("{:>5} {x:>22} {u:>22}", i + 1);
    }
    let paths = write_files(&dir, &[("equilibrium.csv".into(), equilibrium_csv(eq, &cfg)?)])?;
    listed(&paths, &dir);
    Ok(())
}

fn simulate(c: &Common) -> Result<()> {
    let (cfg, dir) = load(c)?;
    let summary = run_scenario(&cfg)?;
    println!(
        "{}: {} replicas, final spread {} (95% band {}..{}), gap-bound pass rate {}, {} excursions",
        cfg.name,
        cfg.monte_carlo.replicas,
        summary.spread_mean.last().copied().unwrap_or_default(),
        summary.spread_lo.last().copied().unwrap_or_default(),
        summary.spread_hi.last().copied().unwrap_or_default(),
        summary.gap_pass_rate,
        summary.excursions,
    );
    let paths = export_results(&summary, &cfg, &dir)?;
    listed(&paths, &dir);
    Ok(())
}

fn verify(c: &Common) -> Result<bool> {
    let (cfg, dir) = load(c)?;
    let (report, summary) = verify_scenario(&cfg)?;
    for check in &report.checks {
        println!("[{}] {}: {}", if check.passed { "pass" } else { "FAIL" }, check.name, check.detail);
    }
    let json = serde_json::to_vec_pretty(&report).context("serializing report")?;
    let mut paths = export_results(&summary, &cfg, &dir)?;
    paths.extend(write_files(&dir, &[("verify.json".into(), json)])?);
    listed(&paths, &dir);
    Ok(report.all_passed())
}

fn pde(c: &Common) -> Result<()> {
    let (cfg, dir) = load(c)?;
    let solved = solve_scenario(&cfg)?;
    let demo = pde_demo(&cfg, &solved)?;
    let (_, v0) = demo.initial.moments();
    let (_, v1) = demo.heat.moments();
    println!(
        "heat flow to s = {}: variance {v0} -> {v1} (diffusion {})",
        cfg.pde.s,
        solved.games[0].regime.diffusion()
    );
    println!("residual at two time spacings: {} then {}", demo.residuals[0], demo.residuals[1]);
    let paths = write_files(
        &dir,
        &[
            ("pde_initial.csv".into(), field_csv(&demo.initial)?),
            ("pde_heat.csv".into(), field_csv(&demo.heat)?),
            ("pde_transition.csv".into(), field_csv(&demo.transition)?),
        ],
    )?;
    listed(&paths, &dir);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Solve(c) => solve(c).map(|_| true),
        Command::Simulate(c) => simulate(c).map(|_| true),
        Command::Verify(c) => verify(c),
        Command::Pde(c) => pde(c).map(|_| true),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
