use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{hex, ScenarioConfig};
use super::run::{EnsembleSummary, EquilibriumProfile};
use crate::error::{Error, Result};
use crate::sde::{OpinionPath, TimeGrid};
use crate::spectral::WaveField;

pub const EQUILIBRIUM_FILE: &str = "equilibrium.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub regime: String,
    pub package: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub first_replica: u32,
    pub replicas: u32,
    pub grid: TimeGrid,
    pub sample_replica: u32,
    pub sample_excursions: usize,
    pub gap_pass_rate: f64,
    pub excursions: usize,
    pub files: Vec<FileEntry>,
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::param("csv", e.to_string());
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(&r).map_err(wrap)?;
    }
    w.into_inner().map_err(|e| Error::param("csv", e.to_string()))
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

pub fn equilibrium_csv(eq: &EquilibriumProfile, cfg: &ScenarioConfig) -> Result<Vec<u8>> {
    let rows = (0..eq.x_star.len()).map(|i| {
        vec![
            (i + 1).to_string(),
            num(cfg.agents.x0[i]),
            num(eq.x_star[i]),
            num(eq.phi_star[i]),
        ]
    });
    csv_bytes(&header(&["agent", "x0", "x_star", "phi_star"]), rows)
}

pub fn summary_csv(summary: &EnsembleSummary) -> Result<Vec<u8>> {
    let mut cols = header(&["s", "spread_mean", "spread_lo", "spread_hi"]);
    cols.extend((1..=summary.mean_opinions.len()).map(|a| format!("mean_x{a}")));
    let rows = summary.times.iter().enumerate().map(|(k, &s)| {
        let mut r = vec![num(s), num(summary.spread_mean[k]), num(summary.spread_lo[k]), num(summary.spread_hi[k])];
        r.extend(summary.mean_opinions.iter().map(|m| num(m[k])));
        r
    });
    csv_bytes(&cols, rows)
}

/// Long format `(replica, agent, s, x, u, db)`; `db` is empty at the final time.
pub fn trajectory_csv(path: &OpinionPath, replica: u32) -> Result<Vec<u8>> {
    let steps = path.grid.steps;
    let mut rows = Vec::with_capacity(path.agents() * (steps + 1));
    for a in 0..path.agents() {
        for k in 0..=steps {
            rows.push(vec![
                replica.to_string(),
                (a + 1).to_string(),
                num(path.grid.point(k)),
                num(path.opinions[a][k]),
                num(path.controls[a][k]),
                path.increments[a].get(k).map(|&d| num(d)).unwrap_or_default(),
            ]);
        }
    }
    csv_bytes(&header(&["replica", "agent", "s", "x", "u", "db"]), rows)
}

/// `(x, re, im)` rows of a field.
pub fn field_csv(field: &WaveField) -> Result<Vec<u8>> {
    let rows = field.snapshot().into_iter().map(|(x, re, im)| vec![num(x), num(re), num(im)]);
    csv_bytes(&header(&["x", "re", "im"]), rows)
}

fn write(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<FileEntry>) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    files.push(FileEntry {
        name: name.to_string(),
        sha256: hex(&Sha256::digest(bytes)),
    });
    Ok(())
}

/// Writes the configured formats plus the effective config and a manifest.
/// Files are written one at a time in a fixed order.
pub fn export_results(summary: &EnsembleSummary, cfg: &ScenarioConfig, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    export_with_extras(summary, cfg, dir, &[])
}

/// As [`export_results`], with extra named files listed in the manifest.
pub fn export_with_extras(
    summary: &EnsembleSummary,
    cfg: &ScenarioConfig,
    dir: impl AsRef<Path>,
    extras: &[(String, Vec<u8>)],
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    write(dir, CONFIG_FILE, cfg.to_toml()?.as_bytes(), &mut files)?;
    let formats = &cfg.outputs.formats;
    if formats.iter().any(|f| f == "csv") {
        write(dir, EQUILIBRIUM_FILE, &equilibrium_csv(&summary.equilibrium, cfg)?, &mut files)?;
        write(dir, SUMMARY_FILE, &summary_csv(summary)?, &mut files)?;
        write(dir, TRAJECTORY_FILE, &trajectory_csv(&summary.sample_path, cfg.monte_carlo.first_replica)?, &mut files)?;
    }
    if formats.iter().any(|f| f == "json") {
        let json = serde_json::to_vec_pretty(summary).map_err(|e| Error::param("json", e.to_string()))?;
        write(dir, SUMMARY_JSON_FILE, &json, &mut files)?;
    }
    for (name, bytes) in extras {
        write(dir, name, bytes, &mut files)?;
    }

    let manifest = Manifest {
        name: cfg.name.clone(),
        regime: summary.regime.clone(),
        package: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: cfg.hash()?,
        seed: cfg.monte_carlo.seed,
        first_replica: cfg.monte_carlo.first_replica,
        replicas: cfg.monte_carlo.replicas,
        grid: summary.grid,
        sample_replica: cfg.monte_carlo.first_replica,
        sample_excursions: summary.sample_path.excursions,
        gap_pass_rate: summary.gap_pass_rate,
        excursions: summary.excursions,
        files,
    };
    let mut out: Vec<PathBuf> = manifest.files.iter().map(|f| dir.join(&f.name)).collect();
    let bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::param("json", e.to_string()))?;
    let p = dir.join(MANIFEST_FILE);
    fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    out.push(p);
    Ok(out)
}

/// Writes named byte blobs into `dir`, in order.
pub fn write_files(dir: impl AsRef<Path>, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::new();
    for (name, bytes) in files {
        write(dir, name, bytes, &mut entries)?;
    }
    Ok(entries.iter().map(|f| dir.join(&f.name)).collect())
}

pub fn read_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    let p = dir.as_ref().join(MANIFEST_FILE);
    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config(p.display().to_string(), e.to_string()))
}

/// Rebuilds the exported sample path from `trajectory.csv` and the manifest.
pub fn import_sample_path(dir: impl AsRef<Path>) -> Result<OpinionPath> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    let p = dir.join(TRAJECTORY_FILE);
    let bad = |line: usize, msg: String| Error::config(format!("{}:{line}", p.display()), msg);
    let mut rdr = csv::Reader::from_path(&p).map_err(|e| Error::config(p.display().to_string(), e.to_string()))?;
    let grid = manifest.grid;
    let mut opinions: Vec<Vec<f64>> = Vec::new();
    let mut controls: Vec<Vec<f64>> = Vec::new();
    let mut increments: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(line + 2, e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let parse = |i: usize| field(i).parse::<f64>().map_err(|e| bad(line + 2, format!("column {i}: {e}")));
        let agent: usize = field(1).parse().map_err(|e| bad(line + 2, format!("agent: {e}")))?;
        if agent == 0 {
            return Err(bad(line + 2, "agent ids start at 1".into()));
        }
        while opinions.len() < agent {
            opinions.push(Vec::new());
            controls.push(Vec::new());
            increments.push(Vec::new());
        }
        let a = agent - 1;
        opinions[a].push(parse(3)?);
        controls[a].push(parse(4)?);
        if !field(5).is_empty() {
            increments[a].push(parse(5)?);
        }
    }
    if opinions.iter().any(|o| o.len() != grid.steps + 1) {
        return Err(Error::GridMismatch(format!(
            "{} does not hold {} points per agent",
            p.display(),
            grid.steps + 1
        )));
    }
    Ok(OpinionPath {
        grid,
        regime: manifest.regime,
        opinions,
        controls,
        increments,
        excursions: manifest.sample_excursions,
    })
}
