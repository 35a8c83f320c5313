//! Imaginary-time transition function and the constant-coefficient
//! diffusion equation `dPsi/ds = v Psi + z dPsi/dx + w d2Psi/dx2`, solved
//! on a periodic grid by discrete Fourier transform.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::equilibrium::DerivBundle;
use crate::error::{Error, Result};

/// Curvature below which `v` is not evaluated.
pub const CURVATURE_TOL: f64 = 1e-12;
/// Largest boundary magnitude accepted before transforming.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Periodic grid of `n` points `x_min + k dx`, `dx = (x_max - x_min) / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for SpatialGrid {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 5.0,
            n: 1024,
        }
    }
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::param("grid", format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::param("grid.n", format!("{n} is not a power of two >= 4")));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.x_min + k as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// Angular wavenumbers in transform order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let l = self.x_max - self.x_min;
        let n = self.n as i64;
        (0..n)
            .map(|k| {
                let m = if k < n / 2 { k } else { k - n };
                2.0 * PI * m as f64 / l
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub s: f64,
}

impl WaveField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, s: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::DimensionMismatch {
                block: "wave field",
                expected: grid.n.to_string(),
                got: values.len().to_string(),
            });
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::param("values", "non-finite field sample"));
        }
        Ok(Self { grid, values, s })
    }

    pub fn from_fn(grid: SpatialGrid, s: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().into_iter().map(|x| Complex64::new(f(x), 0.0)).collect();
        Self::new(grid, values, s)
    }

    /// Normalized Gaussian with the given mean and variance.
    pub fn gaussian(grid: SpatialGrid, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(Error::param("var", "must be > 0"));
        }
        let c = 1.0 / (2.0 * PI * var).sqrt();
        Self::from_fn(grid, 0.0, |x| c * (-(x - mean).powi(2) / (2.0 * var)).exp())
    }

    pub fn zeros(grid: SpatialGrid, s: f64) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
            s,
        }
    }

    /// `sum Psi dx`
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.dx()
    }

    /// Mean and variance of `Re Psi` treated as a density.
    pub fn moments(&self) -> (f64, f64) {
        let xs = self.grid.points();
        let mass: f64 = self.values.iter().map(|v| v.re).sum();
        let mean = xs.iter().zip(&self.values).map(|(x, v)| x * v.re).sum::<f64>() / mass;
        let var = xs.iter().zip(&self.values).map(|(x, v)| (x - mean).powi(2) * v.re).sum::<f64>() / mass;
        (mean, var)
    }

    /// Largest `|Psi|` difference against another field on the same grid.
    pub fn max_abs_diff(&self, other: &WaveField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `(x, Re Psi, Im Psi)` rows.
    pub fn snapshot(&self) -> Vec<(f64, f64, f64)> {
        self.grid
            .points()
            .into_iter()
            .zip(&self.values)
            .map(|(x, v)| (x, v.re, v.im))
            .collect()
    }

    fn boundary_magnitude(&self) -> f64 {
        self.values[0].norm().max(self.values[self.grid.n - 1].norm())
    }
}

/// `v`, `z`, `w` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeCoefficients {
    pub grid: SpatialGrid,
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

impl PdeCoefficients {
    pub fn new(grid: SpatialGrid, v: Vec<f64>, z: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        for (name, c) in [("v", &v), ("z", &z), ("w", &w)] {
            if c.len() != grid.n {
                return Err(Error::DimensionMismatch {
                    block: "pde coefficients",
                    expected: grid.n.to_string(),
                    got: format!("{} samples of {name}", c.len()),
                });
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::param(name, "non-finite sample"));
            }
        }
        if let Some(bad) = w.iter().find(|&&x| x < 0.0) {
            return Err(Error::param("w", format!("diffusion must be >= 0, got {bad}")));
        }
        Ok(Self { grid, v, z, w })
    }

    pub fn constant(grid: SpatialGrid, v: f64, z: f64, w: f64) -> Result<Self> {
        Self::new(grid, vec![v; grid.n], vec![z; grid.n], vec![w; grid.n])
    }

    /// `(v, z, w)` if every sample agrees with the first.
    pub fn as_constant(&self) -> Option<(f64, f64, f64)> {
        let same = |c: &[f64]| c.iter().all(|&x| x == c[0]);
        (same(&self.v) && same(&self.z) && same(&self.w)).then(|| (self.v[0], self.z[0], self.w[0]))
    }
}

/// `v = f_x^2 / f_xx^2 - f`.
pub fn wick_rhs(db: &DerivBundle) -> Result<f64> {
    if !(db.f_xx.abs() >= CURVATURE_TOL) {
        return Err(Error::SingularCurvature(db.f_xx.abs()));
    }
    Ok((db.f_x / db.f_xx).powi(2) - db.f)
}

/// `Psi_s(x) = I(x) exp(s v(x))`.
pub fn transition_wave(initial: &WaveField, v: &[f64], s: f64) -> Result<WaveField> {
    if v.len() != initial.grid.n {
        return Err(Error::GridMismatch(format!(
            "{} samples of v on a {}-point grid",
            v.len(),
            initial.grid.n
        )));
    }
    let values = initial
        .values
        .iter()
        .zip(v)
        .map(|(psi, &vx)| {
            let e = s * vx;
            let out = psi * e.exp();
            if out.re.is_finite() && out.im.is_finite() {
                Ok(out)
            } else {
                Err(Error::Overflow {
                    what: "transition wave",
                    exponent: e,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WaveField {
        grid: initial.grid,
        values,
        s: initial.s + s,
    })
}

struct Transform {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Transform {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            n,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Forward then inverse transform.
pub fn round_trip(field: &WaveField) -> WaveField {
    let t = Transform::new(field.grid.n);
    let mut buf = field.values.clone();
    t.forward(&mut buf);
    t.inverse(&mut buf);
    WaveField { values: buf, ..field.clone() }
}

/// Advances `initial` by `s` under spatially constant coefficients.
pub fn solve_diffusion_fourier(coeffs: &PdeCoefficients, initial: &WaveField, s: f64) -> Result<WaveField> {
    if coeffs.grid != initial.grid {
        return Err(Error::GridMismatch("coefficients and field use different grids".into()));
    }
    let (v, z, w) = coeffs
        .as_constant()
        .ok_or_else(|| Error::param("coefficients", "only spatially constant v, z, w are supported"))?;
    let edge = initial.boundary_magnitude();
    if edge > BOUNDARY_TOL {
        return Err(Error::Aliasing(edge));
    }
    let t = Transform::new(initial.grid.n);
    let mut buf = initial.values.clone();
    t.forward(&mut buf);
    for (c, xi) in buf.iter_mut().zip(initial.grid.wavenumbers()) {
        let expo = Complex64::new(-s * (w * xi * xi - v), s * z * xi);
        *c *= expo.exp();
    }
    t.inverse(&mut buf);
    if buf.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::Overflow {
            what: "fourier multiplier",
            exponent: s * v,
        });
    }
    Ok(WaveField {
        grid: initial.grid,
        values: buf,
        s: initial.s + s,
    })
}

/// Spectral first and second derivatives; the unpaired Nyquist mode is
/// dropped from the first derivative.
fn spectral_derivatives(t: &Transform, field: &WaveField) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = field.grid.n;
    let mut hat = field.values.clone();
    t.forward(&mut hat);
    let ks = field.grid.wavenumbers();
    let mut d1 = hat.clone();
    let mut d2 = hat;
    for k in 0..n {
        let ik = Complex64::new(0.0, ks[k]);
        d1[k] = if k == n / 2 { Complex64::new(0.0, 0.0) } else { d1[k] * ik };
        d2[k] *= -ks[k] * ks[k];
    }
    t.inverse(&mut d1);
    t.inverse(&mut d2);
    (d1, d2)
}

/// RMS over interior slices of `sqrt(dx sum |r|^2)` with
/// `r = dPsi/ds - v Psi - z dPsi/dx - w d2Psi/dx2`, central in time.
pub fn schrodinger_residual(series: &[WaveField], coeffs: &PdeCoefficients) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::param("series", format!("need at least 3 slices, got {}", series.len())));
    }
    let grid = series[0].grid;
    if coeffs.grid != grid || series.iter().any(|f| f.grid != grid) {
        return Err(Error::GridMismatch("slices and coefficients must share one grid".into()));
    }
    let ds = series[1].s - series[0].s;
    if !(ds > 0.0) {
        return Err(Error::param("series", "time stamps must increase"));
    }
    for w in series.windows(2) {
        if ((w[1].s - w[0].s) - ds).abs() > 1e-9 * ds.max(w[1].s.abs()) {
            return Err(Error::GridMismatch(format!("non-uniform time spacing at s = {}", w[0].s)));
        }
    }
    let t = Transform::new(grid.n);
    let dx = grid.dx();
    let mut total = 0.0;
    for k in 1..series.len() - 1 {
        let (d1, d2) = spectral_derivatives(&t, &series[k]);
        let mut sq = 0.0;
        for j in 0..grid.n {
            let dt = (series[k + 1].values[j] - series[k - 1].values[j]) / (2.0 * ds);
            let r = dt - coeffs.v[j] * series[k].values[j] - coeffs.z[j] * d1[j] - coeffs.w[j] * d2[j];
            sq += r.norm_sqr();
        }
        total += sq * dx;
    }
    Ok((total / (series.len() - 2) as f64).sqrt())
}

/// Slices `k * ds`, `k = 0..count`, of the spectral solution from `initial`.
pub fn fourier_series(coeffs: &PdeCoefficients, initial: &WaveField, ds: f64, count: usize) -> Result<Vec<WaveField>> {
    (0..count)
        .map(|k| solve_diffusion_fourier(coeffs, initial, k as f64 * ds))
        .collect()
}
