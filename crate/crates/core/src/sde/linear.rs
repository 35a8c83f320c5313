use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::noise::{NoisePaths, TimeGrid};
use crate::error::{Error, Result};
use crate::network::SystemMatrices;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormVariant {
    /// `e^{As} X0 + (int_0^s e^{Ar} dr) K X0 + S B(s) + int_0^s e^{A(s-r)} A S B(r) dr`
    #[default]
    VariationOfConstants,
    /// `e^{As} K X0 + S B(s) + int_0^s e^{A(s-r)} A S B(r) dr`, without the
    /// free response of `X0` and with the forcing applied only once.
    Literal,
}

/// `e^M`, rejecting non-finite results.
pub fn matrix_exp(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::MatrixExponential(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::MatrixExponential("non-finite input".into()));
    }
    let e = m.clone().exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::MatrixExponential(format!(
            "norm overflow (input norm {:e})",
            m.norm()
        )));
    }
    Ok(e)
}

/// `(e^{A dt}, int_0^dt e^{Ar} dr)` from one exponential of `[[A, I], [0, 0]] dt`.
pub fn exp_and_integral(a: &DMatrix<f64>, dt: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut aug = DMatrix::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * dt));
    for i in 0..n {
        aug[(i, n + i)] = dt;
    }
    let e = matrix_exp(&aug)?;
    Ok((e.view((0, 0), (n, n)).into_owned(), e.view((0, n), (n, n)).into_owned()))
}

fn check_inputs(sm: &SystemMatrices, x0: &DVector<f64>, grid: &TimeGrid, noise: &NoisePaths) -> Result<()> {
    let dim = sm.a.nrows();
    if x0.len() != dim {
        return Err(Error::DimensionMismatch {
            block: "X0",
            expected: dim.to_string(),
            got: x0.len().to_string(),
        });
    }
    noise.check(sm.noise_dim(), grid)
}

fn brownian_at(noise: &NoisePaths, m: usize, k: usize, acc: &mut DVector<f64>) {
    if k > 0 {
        for d in 0..m {
            acc[d] += noise.increments[d][k - 1];
        }
    }
}

/// Closed-form solution of `dX = (A X + K X0) ds + S dB` on the grid, with
/// the stochastic convolution integrated by parts and the remaining
/// `ds` integral taken by left rectangles.
pub fn closed_form_linear(
    sm: &SystemMatrices,
    x0: &DVector<f64>,
    grid: &TimeGrid,
    noise: &NoisePaths,
    variant: ClosedFormVariant,
) -> Result<Vec<DVector<f64>>> {
    check_inputs(sm, x0, grid, noise)?;
    let dt = grid.dt();
    let m = sm.noise_dim();
    let (e_step, phi_step) = exp_and_integral(&sm.a, dt)?;
    let kx0 = &sm.k_hat * x0;
    let a_sigma = &sm.a * &sm.sigma_hat;

    let dim = sm.a.nrows();
    let mut exp_as = DMatrix::<f64>::identity(dim, dim);
    let mut phi = DMatrix::<f64>::zeros(dim, dim);
    let mut j = DVector::<f64>::zeros(dim);
    let mut b = DVector::<f64>::zeros(m);
    let mut out = Vec::with_capacity(grid.steps + 1);
    for k in 0..=grid.steps {
        brownian_at(noise, m, k, &mut b);
        let noise_part = &sm.sigma_hat * &b + &j;
        let x = match variant {
            ClosedFormVariant::VariationOfConstants => &exp_as * x0 + &phi * &kx0 + noise_part,
            ClosedFormVariant::Literal => &exp_as * &kx0 + noise_part,
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k, agent: 0 });
        }
        out.push(x);
        if k == grid.steps {
            break;
        }
        j = &e_step * (j + &a_sigma * &b * dt);
        phi += &exp_as * &phi_step;
        exp_as = &e_step * exp_as;
    }
    Ok(out)
}

/// Euler–Maruyama for the same stacked system.
pub fn simulate_linear_em(
    sm: &SystemMatrices,
    x0: &DVector<f64>,
    grid: &TimeGrid,
    noise: &NoisePaths,
) -> Result<Vec<DVector<f64>>> {
    check_inputs(sm, x0, grid, noise)?;
    let dt = grid.dt();
    let m = sm.noise_dim();
    let kx0 = &sm.k_hat * x0;
    let mut x = x0.clone();
    let mut db = DVector::<f64>::zeros(m);
    let mut out = Vec::with_capacity(grid.steps + 1);
    out.push(x.clone());
    for k in 0..grid.steps {
        for d in 0..m {
            db[d] = noise.increments[d][k];
        }
        x = &x + (&sm.a * &x + &kx0) * dt + &sm.sigma_hat * &db;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k + 1, agent: 0 });
        }
        out.push(x.clone());
    }
    Ok(out)
}
