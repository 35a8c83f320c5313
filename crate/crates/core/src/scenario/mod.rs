//! Config-driven runs: load a scenario, solve its equilibrium, simulate a
//! Monte Carlo ensemble and export the results.

mod config;
mod export;
mod run;
mod verify;

pub use config::{
    load_scenario, AgentsConfig, ControlMode, GridConfig, HParamsConfig, MonteCarloConfig, OutputConfig, PdeConfig,
    RegimeConfig, ScenarioConfig, SolverConfig,
};
pub use export::{
    equilibrium_csv, export_results, export_with_extras, field_csv, import_sample_path, read_manifest, summary_csv,
    trajectory_csv, write_files, FileEntry, Manifest, CONFIG_FILE, EQUILIBRIUM_FILE, MANIFEST_FILE, SUMMARY_FILE,
    SUMMARY_JSON_FILE, TRAJECTORY_FILE,
};
pub use run::{
    run_scenario, run_with, simulate_replica, solve_scenario, EnsembleSummary, EquilibriumProfile, ReplicaRecord,
    Solved,
};
pub use verify::{pde_demo, verify_scenario, Check, PdeDemo, VerifyReport};
