//! Real roots of a cubic via the Cardano radical form, switching to the
//! trigonometric form when all three roots are real.
//!
//! For `c3 x^3 + c2 x^2 + c1 x + c0` the radical form reads
//!
//! ```text
//! p = -c2 / (3 c3)
//! q = p^3 + (c2 c1 - 3 c3 c0) / (6 c3^2)
//! r = c1 / (3 c3)
//! x = p + cbrt(q + sqrt(D)) + cbrt(q - sqrt(D)),   D = q^2 + (r - p^2)^3
//! ```
//!
//! `D < 0` is the irreducible case: the radicals pass through complex
//! numbers, so the three roots are taken as `p + 2 sqrt(-P) cos(theta - 2 pi k / 3)`
//! with `P = r - p^2` and `cos(3 theta) = q / (-P)^{3/2}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root soundness bound: `|poly(root)| <= ROOT_RESIDUAL_TOL * max(1, ||coeffs||)`.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicPoly {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicPoly {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (3.0 * self.c3 * x + 2.0 * self.c2) * x + self.c1
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        (self.c3 * self.c3 + self.c2 * self.c2 + self.c1 * self.c1 + self.c0 * self.c0).sqrt()
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.c3, self.c2, self.c1, self.c0]
    }

    /// The Cardano intermediates `(p, q, r)`.
    pub fn cardano_terms(&self) -> (f64, f64, f64) {
        let p = -self.c2 / (3.0 * self.c3);
        let q = p * p * p + (self.c2 * self.c1 - 3.0 * self.c3 * self.c0) / (6.0 * self.c3 * self.c3);
        let r = self.c1 / (3.0 * self.c3);
        (p, q, r)
    }

    /// `|poly(x)|` scaled by the coefficient norm, compared against [`ROOT_RESIDUAL_TOL`].
    pub fn scaled_residual(&self, x: f64) -> f64 {
        self.eval(x).abs() / self.norm().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootBranch {
    OneReal,
    /// Discriminant exactly zero: a repeated root.
    Repeated,
    ThreeReal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    /// Distinct real roots in ascending order.
    pub roots: Vec<f64>,
    /// `q^2 + (r - p^2)^3`
    pub discriminant: f64,
    pub branch: RootBranch,
}

impl RootSet {
    pub fn max(&self) -> f64 {
        *self.roots.last().expect("a real cubic has at least one real root")
    }
}

pub fn solve_cubic_real(poly: &CubicPoly) -> Result<RootSet> {
    if poly.c3 == 0.0 || !poly.c3.is_finite() {
        return Err(Error::DegenerateCubic { leading: poly.c3 });
    }
    let (p, q, r) = poly.cardano_terms();
    let pp = r - p * p;
    let disc = q * q + pp * pp * pp;

    let (mut roots, branch) = if disc < 0.0 {
        // pp < 0 here
        let m = (-pp).sqrt();
        let cos3 = (q / (m * m * m)).clamp(-1.0, 1.0);
        let theta = cos3.acos() / 3.0;
        let roots = (0..3)
            .map(|k| p + 2.0 * m * (theta - 2.0 * PI * k as f64 / 3.0).cos())
            .collect::<Vec<_>>();
        (roots, RootBranch::ThreeReal)
    } else {
        // cbrt(q + sign(q) sqrt(D)) avoids cancellation; the partner radical
        // follows from the product of the two being -pp.
        let big = (q + q.signum() * disc.sqrt()).cbrt();
        let small = if big == 0.0 { 0.0 } else { -pp / big };
        if disc == 0.0 && big != 0.0 {
            (vec![p + 2.0 * big, p - big], RootBranch::Repeated)
        } else {
            (vec![p + big + small], RootBranch::OneReal)
        }
    };

    for root in roots.iter_mut() {
        *root = polish(poly, *root);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    Ok(RootSet {
        roots,
        discriminant: disc,
        branch,
    })
}

/// A few Newton steps, kept only while they reduce the residual.
fn polish(poly: &CubicPoly, mut x: f64) -> f64 {
    let mut best = poly.eval(x).abs();
    for _ in 0..4 {
        let d = poly.derivative(x);
        if d == 0.0 || best == 0.0 {
            break;
        }
        let next = x - poly.eval(x) / d;
        let val = poly.eval(next).abs();
        if !(val < best) {
            break;
        }
        x = next;
        best = val;
    }
    x
}

/// Real roots of a polynomial of degree at most three, given highest
/// coefficient first. Leading zeros are dropped; an identically zero
/// polynomial yields no roots.
pub fn solve_reduced_real(coeffs: [f64; 4]) -> Result<Vec<f64>> {
    let start = coeffs.iter().position(|&c| c != 0.0);
    let Some(start) = start else {
        return Ok(Vec::new());
    };
    let c = &coeffs[start..];
    match c.len() {
        4 => solve_cubic_real(&CubicPoly::new(c[0], c[1], c[2], c[3])).map(|rs| rs.roots),
        3 => {
            let (a, b, cc) = (c[0], c[1], c[2]);
            let disc = b * b - 4.0 * a * cc;
            if disc < 0.0 {
                return Ok(Vec::new());
            }
            let qq = -0.5 * (b + b.signum() * disc.sqrt());
            let mut roots = if qq == 0.0 {
                vec![0.0]
            } else {
                vec![qq / a, cc / qq]
            };
            roots.sort_by(f64::total_cmp);
            roots.dedup();
            Ok(roots)
        }
        2 => Ok(vec![-c[1] / c[0]]),
        _ => Ok(Vec::new()),
    }
}
