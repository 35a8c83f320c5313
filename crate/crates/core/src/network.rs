//! Weighted directed influence network and the block matrices of the
//! stacked opinion/multiplier linear system.
//!
//! Agent ids are 1-based in [`NetworkSpec`] (they come from config files);
//! matrix rows and columns are 0-based.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed edge `(from, to)`: `weight` is the influence of `to` on `from`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    #[serde(rename = "w")]
    pub weight: f64,
}

impl Edge {
    pub fn new(from: usize, to: usize, weight: f64) -> Self {
        Self { from, to, weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n: usize,
    #[serde(default)]
    pub edges: Vec<Edge>,
    pub stubbornness: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    TooFewAgents,
    StubbornnessLength,
    NegativeStubbornness,
    NonFiniteStubbornness,
    AgentOutOfRange,
    SelfEdge,
    NegativeWeight,
    NonFiniteWeight,
    DuplicateEdge,
    LeaderOutOfRange,
}

impl ViolationKind {
    fn label(self) -> &'static str {
        match self {
            ViolationKind::TooFewAgents => "too few agents",
            ViolationKind::StubbornnessLength => "stubbornness length",
            ViolationKind::NegativeStubbornness => "negative stubbornness",
            ViolationKind::NonFiniteStubbornness => "non-finite stubbornness",
            ViolationKind::AgentOutOfRange => "agent out of range",
            ViolationKind::SelfEdge => "self-edge",
            ViolationKind::NegativeWeight => "negative weight",
            ViolationKind::NonFiniteWeight => "non-finite weight",
            ViolationKind::DuplicateEdge => "duplicate edge",
            ViolationKind::LeaderOutOfRange => "leader out of range",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Field path relative to the network section, e.g. `edges[0].w`.
    pub field: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind.label(), self.field, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, field: String, detail: String) {
        self.violations.push(Violation {
            kind,
            field,
            detail,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (idx, v) in self.violations.iter().enumerate() {
            if idx > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl NetworkSpec {
    /// Lists every violated invariant. Never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.n < 2 {
            report.push(
                ViolationKind::TooFewAgents,
                "n".into(),
                format!("need at least 2 agents, got {}", self.n),
            );
        }
        if self.stubbornness.len() != self.n {
            report.push(
                ViolationKind::StubbornnessLength,
                "stubbornness".into(),
                format!("expected {} entries, got {}", self.n, self.stubbornness.len()),
            );
        }
        for (i, &k) in self.stubbornness.iter().enumerate() {
            if !k.is_finite() {
                report.push(
                    ViolationKind::NonFiniteStubbornness,
                    format!("stubbornness[{i}]"),
                    format!("{k}"),
                );
            } else if k < 0.0 {
                report.push(
                    ViolationKind::NegativeStubbornness,
                    format!("stubbornness[{i}]"),
                    format!("{k} < 0"),
                );
            }
        }

        let mut seen = HashSet::new();
        for (idx, e) in self.edges.iter().enumerate() {
            for (end, id) in [("from", e.from), ("to", e.to)] {
                if id == 0 || id > self.n {
                    report.push(
                        ViolationKind::AgentOutOfRange,
                        format!("edges[{idx}].{end}"),
                        format!("agent id {id} not in 1..={}", self.n),
                    );
                }
            }
            if e.from == e.to {
                report.push(
                    ViolationKind::SelfEdge,
                    format!("edges[{idx}]"),
                    format!("({}, {})", e.from, e.to),
                );
            }
            if !e.weight.is_finite() {
                report.push(
                    ViolationKind::NonFiniteWeight,
                    format!("edges[{idx}].w"),
                    format!("{}", e.weight),
                );
            } else if e.weight < 0.0 {
                report.push(
                    ViolationKind::NegativeWeight,
                    format!("edges[{idx}].w"),
                    format!("{} < 0", e.weight),
                );
            }
            if !seen.insert((e.from, e.to)) {
                report.push(
                    ViolationKind::DuplicateEdge,
                    format!("edges[{idx}]"),
                    format!("({}, {}) listed more than once", e.from, e.to),
                );
            }
        }
        if let Some(leader) = self.leader {
            if leader == 0 || leader > self.n {
                report.push(
                    ViolationKind::LeaderOutOfRange,
                    "leader".into(),
                    format!("agent id {leader} not in 1..={}", self.n),
                );
            }
        }
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(report))
        }
    }

    /// Weight of edge `(from, to)` (1-based ids); absent edges weigh 0.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.edges
            .iter()
            .find(|e| e.from == from && e.to == to)
            .map_or(0.0, |e| e.weight)
    }

    /// Out-neighbours of agent `i` (1-based).
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.from == i).map(|e| e.to)
    }

    /// Diagonal entries `q_i = sum_{j in eta_i} w_ij + k_i`.
    pub fn diagonal_loads(&self) -> Vec<f64> {
        let mut q = self.stubbornness.clone();
        for e in &self.edges {
            q[e.from - 1] += e.weight;
        }
        q
    }

    /// Laplacian-like matrix: `q_i` on the diagonal, `-w_ij` off it.
    pub fn influence_matrix(&self) -> Result<DMatrix<f64>> {
        self.ensure_valid()?;
        let mut w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diagonal_loads()));
        for e in &self.edges {
            w[(e.from - 1, e.to - 1)] = -e.weight;
        }
        Ok(w)
    }

    /// Relabels agents: new id of old agent `i` (1-based) is `perm[i - 1] + 1`.
    pub fn permuted(&self, perm: &[usize]) -> NetworkSpec {
        let mut stubbornness = vec![0.0; self.n];
        for (old, &new) in perm.iter().enumerate() {
            stubbornness[new] = self.stubbornness[old];
        }
        NetworkSpec {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| Edge::new(perm[e.from - 1] + 1, perm[e.to - 1] + 1, e.weight))
                .collect(),
            stubbornness,
            leader: self.leader.map(|l| perm[l - 1] + 1),
        }
    }
}

/// Blocks of `dX = K_hat X0 ds + A X ds + Sigma_hat dB` with `X = [x, lambda]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    /// `[mu, -I; -W, 0]`
    pub a: DMatrix<f64>,
    /// `[0, 0; K, 0]`
    pub k_hat: DMatrix<f64>,
    /// `[sigma; 0]`, 2n x m
    pub sigma_hat: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub q: Vec<f64>,
}

impl SystemMatrices {
    pub fn agents(&self) -> usize {
        self.w.nrows()
    }

    pub fn noise_dim(&self) -> usize {
        self.sigma_hat.ncols()
    }
}

pub fn stack_system_matrices(
    spec: &NetworkSpec,
    mu: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
) -> Result<SystemMatrices> {
    let n = spec.n;
    let w = spec.influence_matrix()?;
    if mu.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            block: "mu",
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", mu.nrows(), mu.ncols()),
        });
    }
    if sigma.nrows() != n || sigma.ncols() == 0 {
        return Err(Error::DimensionMismatch {
            block: "sigma",
            expected: format!("{n}xm with m >= 1"),
            got: format!("{}x{}", sigma.nrows(), sigma.ncols()),
        });
    }

    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(mu);
    a.view_mut((0, n), (n, n)).fill_with_identity();
    a.view_mut((0, n), (n, n)).scale_mut(-1.0);
    a.view_mut((n, 0), (n, n)).copy_from(&(-&w));

    let mut k_hat = DMatrix::zeros(2 * n, 2 * n);
    for (i, &k) in spec.stubbornness.iter().enumerate() {
        k_hat[(n + i, i)] = k;
    }

    let mut sigma_hat = DMatrix::zeros(2 * n, sigma.ncols());
    sigma_hat.view_mut((0, 0), (n, sigma.ncols())).copy_from(sigma);

    Ok(SystemMatrices {
        a,
        k_hat,
        sigma_hat,
        q: spec.diagonal_loads(),
        w,
    })
}
