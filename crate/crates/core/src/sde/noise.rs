use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t: f64, steps: usize) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("grid.t", format!("horizon must be positive, got {t}")));
        }
        if steps == 0 {
            return Err(Error::param("grid.steps", "need at least one step"));
        }
        Ok(Self { t, steps })
    }

    /// `t / 10^4` spacing.
    pub fn with_default_steps(t: f64) -> Result<Self> {
        Self::new(t, 10_000)
    }

    pub fn dt(&self) -> f64 {
        self.t / self.steps as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(|k| self.point(k))
    }
}

/// Brownian increments, one row per noise dimension (agent), one column per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePaths {
    pub seed: u64,
    pub replica: u32,
    pub grid: TimeGrid,
    pub increments: Vec<Vec<f64>>,
    /// Multiplier-block increments; zero unless set explicitly.
    pub lambda_increments: Vec<Vec<f64>>,
}

/// Independent stream for `(replica, dimension)` under one root seed.
pub fn substream(root_seed: u64, replica: u32, dim: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(((replica as u64) << 32) | dim as u64);
    rng
}

impl NoisePaths {
    /// Draws `dims` independent paths. Dimension `d` always uses the same
    /// substream, so adding dimensions leaves existing paths untouched.
    pub fn generate(root_seed: u64, replica: u32, dims: usize, grid: TimeGrid) -> Self {
        let sd = grid.dt().sqrt();
        let increments = (0..dims)
            .map(|d| {
                let mut rng = substream(root_seed, replica, d as u32);
                (0..grid.steps)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        z * sd
                    })
                    .collect()
            })
            .collect();
        Self {
            seed: root_seed,
            replica,
            grid,
            increments,
            lambda_increments: vec![vec![0.0; grid.steps]; dims],
        }
    }

    pub fn zero(dims: usize, grid: TimeGrid) -> Self {
        Self {
            seed: 0,
            replica: 0,
            grid,
            increments: vec![vec![0.0; grid.steps]; dims],
            lambda_increments: vec![vec![0.0; grid.steps]; dims],
        }
    }

    pub fn dims(&self) -> usize {
        self.increments.len()
    }

    /// Sums consecutive blocks of `factor` increments: the same Brownian path
    /// seen on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.grid.steps % factor != 0 {
            return Err(Error::GridMismatch(format!(
                "cannot coarsen {} steps by {factor}",
                self.grid.steps
            )));
        }
        let grid = TimeGrid::new(self.grid.t, self.grid.steps / factor)?;
        let sum = |rows: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            rows.iter()
                .map(|r| r.chunks(factor).map(|c| c.iter().sum()).collect())
                .collect()
        };
        Ok(Self {
            seed: self.seed,
            replica: self.replica,
            grid,
            increments: sum(&self.increments),
            lambda_increments: sum(&self.lambda_increments),
        })
    }

    /// `B(s_k)` for `k = 0..=steps`.
    pub fn brownian(&self, dim: usize) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.grid.steps + 1);
        let mut acc = 0.0;
        b.push(acc);
        for &db in &self.increments[dim] {
            acc += db;
            b.push(acc);
        }
        b
    }

    /// Reorders dimensions so that new dimension `perm[d]` carries old dimension `d`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inc = self.increments.clone();
        let mut lam = self.lambda_increments.clone();
        for (d, &p) in perm.iter().enumerate() {
            inc[p] = self.increments[d].clone();
            lam[p] = self.lambda_increments[d].clone();
        }
        Self {
            increments: inc,
            lambda_increments: lam,
            ..self.clone()
        }
    }

    /// Keeps dimensions `dims`, in that order.
    pub fn subset(&self, dims: &[usize]) -> Result<Self> {
        if let Some(&bad) = dims.iter().find(|&&d| d >= self.dims()) {
            return Err(Error::DimensionMismatch {
                block: "noise subset",
                expected: format!("< {}", self.dims()),
                got: bad.to_string(),
            });
        }
        Ok(Self {
            increments: dims.iter().map(|&d| self.increments[d].clone()).collect(),
            lambda_increments: dims.iter().map(|&d| self.lambda_increments[d].clone()).collect(),
            ..self.clone()
        })
    }

    pub(crate) fn check(&self, dims: usize, grid: &TimeGrid) -> Result<()> {
        if self.grid != *grid {
            return Err(Error::GridMismatch(format!(
                "noise drawn on {:?}, simulation on {:?}",
                self.grid, grid
            )));
        }
        if self.dims() < dims {
            return Err(Error::DimensionMismatch {
                block: "noise",
                expected: format!(">= {dims} paths"),
                got: self.dims().to_string(),
            });
        }
        Ok(())
    }
}
