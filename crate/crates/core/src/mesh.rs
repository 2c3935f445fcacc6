//! Layer-adapted meshes on `[0, 1]`.
//!
//! The main mesh is the smoothed Shishkin mesh `x_i = φ(i/N)`, where `φ` is
//! linear on `[0, q]` (slope `λ/q`), adds a cubic `p (t − q)³` on `[q, 1/2]`
//! and is mirrored about `t = 1/2`. `φ` is `C¹`, so the steps vary smoothly
//! across the transition point `λ = min(σ ε ln N / √m, q)`.
//!
//! The classical piecewise-uniform Shishkin mesh and the uniform mesh are
//! provided for comparison runs.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    /// Number of subintervals `N`; at least 8 and divisible by 4.
    pub n: usize,
    /// Fraction of `[0,1]` in parameter space mapped onto each layer region.
    pub q: f64,
    pub sigma: f64,
    pub epsilon: f64,
    /// Lower bound on `f_y` of the problem being meshed.
    pub m: f64,
}

impl MeshParams {
    pub const DEFAULT_Q: f64 = 0.25;
    pub const DEFAULT_SIGMA: f64 = 2.0;

    pub fn new(n: usize, epsilon: f64, m: f64) -> Self {
        Self {
            n,
            q: Self::DEFAULT_Q,
            sigma: Self::DEFAULT_SIGMA,
            epsilon,
            m,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 || !self.n.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "N must be at least 8 and divisible by 4, got {}",
                self.n
            )));
        }
        if !(self.q > 0.0 && self.q < 0.5) {
            return Err(Error::Config(format!(
                "q must lie in (0, 1/2), got {}",
                self.q
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::Config(format!("m must be positive, got {}", self.m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    #[default]
    SmoothedShishkin,
    Shishkin,
    Uniform,
}

impl MeshKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MeshKind::SmoothedShishkin => "smoothed-shishkin",
            MeshKind::Shishkin => "shishkin",
            MeshKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "smoothed-shishkin" | "smoothed" => Ok(MeshKind::SmoothedShishkin),
            "shishkin" => Ok(MeshKind::Shishkin),
            "uniform" => Ok(MeshKind::Uniform),
            other => Err(Error::Config(format!("unknown mesh kind '{other}'"))),
        }
    }
}

/// `λ = min(σ ε ln N / √m, q)`.
pub fn transition_point(params: &MeshParams) -> f64 {
    let lambda = params.sigma * params.epsilon * (params.n as f64).ln() / params.m.sqrt();
    lambda.min(params.q)
}

/// Coefficient of the cubic part of `φ`, fixed by `φ(1/2) = 1/2`.
fn cubic_coefficient(q: f64, lambda: f64) -> f64 {
    0.5 * (1.0 - lambda / q) / (0.5 - q).powi(3)
}

fn phi_left(q: f64, lambda: f64, p: f64, t: f64) -> f64 {
    if t <= q {
        lambda / q * t
    } else {
        let s = t - q;
        p * s * s * s + lambda / q * t
    }
}

/// Mesh generating function `φ(t)` for `t ∈ [0, 1]`.
pub fn generating_function(params: &MeshParams, lambda: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} outside [0, 1]")));
    }
    let q = params.q;
    let p = cubic_coefficient(q, lambda);
    Ok(if t <= 0.5 {
        phi_left(q, lambda, p, t)
    } else {
        1.0 - phi_left(q, lambda, p, 1.0 - t)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerMesh {
    nodes: Vec<f64>,
    steps: Vec<f64>,
    lambda: f64,
    kind: MeshKind,
    params: MeshParams,
}

impl LayerMesh {
    pub fn generate(params: &MeshParams, kind: MeshKind) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let half = n / 2;
        let lambda = transition_point(params);
        let mut nodes = vec![0.0; n + 1];

        match kind {
            MeshKind::SmoothedShishkin => {
                let p = cubic_coefficient(params.q, lambda);
                for (i, x) in nodes.iter_mut().enumerate().take(half) {
                    *x = phi_left(params.q, lambda, p, i as f64 / n as f64);
                }
            }
            MeshKind::Shishkin => {
                let fine = params.q * n as f64;
                let k = fine.round() as usize;
                if (fine - k as f64).abs() > 1e-9 || k == 0 || k >= half {
                    return Err(Error::Config(format!(
                        "Shishkin mesh needs q*N to be an integer in [1, N/2), got {fine}"
                    )));
                }
                let coarse_step = (0.5 - lambda) / (half - k) as f64;
                for (i, x) in nodes.iter_mut().enumerate().take(half) {
                    *x = if i <= k {
                        lambda * i as f64 / k as f64
                    } else {
                        lambda + coarse_step * (i - k) as f64
                    };
                }
            }
            MeshKind::Uniform => {
                for (i, x) in nodes.iter_mut().enumerate().take(half) {
                    *x = i as f64 / n as f64;
                }
            }
        }
        nodes[half] = 0.5;
        for i in 0..half {
            nodes[n - i] = 1.0 - nodes[i];
        }

        Self::from_parts(nodes, lambda, kind, *params)
    }

    fn from_parts(
        nodes: Vec<f64>,
        lambda: f64,
        kind: MeshKind,
        params: MeshParams,
    ) -> Result<Self> {
        let steps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(i) = steps.iter().position(|&h| !(h > 0.0)) {
            return Err(Error::Config(format!(
                "mesh is not strictly increasing at interval {i} (h = {:e})",
                steps[i]
            )));
        }
        Ok(Self {
            nodes,
            steps,
            lambda,
            kind,
            params,
        })
    }

    /// Mesh with `2N` intervals obtained by inserting every midpoint; the
    /// right half is mirrored from the left so symmetry is kept exactly.
    pub fn bisect(&self) -> Result<Self> {
        let n = self.n();
        let fine_n = 2 * n;
        let mut nodes = vec![0.0; fine_n + 1];
        for i in 0..n / 2 {
            nodes[2 * i] = self.nodes[i];
            nodes[2 * i + 1] = 0.5 * (self.nodes[i] + self.nodes[i + 1]);
        }
        nodes[n] = 0.5;
        for i in 0..n {
            nodes[fine_n - i] = 1.0 - nodes[i];
        }
        let params = MeshParams {
            n: fine_n,
            ..self.params
        };
        Self::from_parts(nodes, self.lambda, self.kind, params)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `h_i = x_{i+1} − x_i`, `i = 0 … N−1`.
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn n(&self) -> usize {
        self.steps.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// True when `λ` hit the cap `q`, which makes the smoothed mesh uniform.
    pub fn is_clamped(&self) -> bool {
        self.lambda >= self.params.q
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn params(&self) -> &MeshParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.params.epsilon
    }

    /// Index `i` of the interval `[x_i, x_{i+1}]` that contains `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let i = self.nodes.partition_point(|&node| node <= x);
        Ok(i.saturating_sub(1).min(self.n() - 1))
    }

    pub fn diagnostics(&self) -> MeshDiagnostics {
        mesh_diagnostics(self)
    }

    /// One node per line: `index<TAB>x_i<TAB>h_i`, 17 significant digits,
    /// the last line without a step.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, &x) in self.nodes.iter().enumerate() {
            match self.steps.get(i) {
                Some(&h) => writeln!(out, "{i}\t{x:.16e}\t{h:.16e}")?,
                None => writeln!(out, "{i}\t{x:.16e}")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshDiagnostics {
    /// `max_i h_i · N`.
    pub max_step_scaled: f64,
    /// `max_i |h_{i+1} − h_i| · N²`.
    pub max_step_jump_scaled: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// `h_{i−1} ≤ h_i` across the left half, up to node rounding.
    pub left_nondecreasing: bool,
    /// `h_{i−1} ≥ h_i` across the right half, up to node rounding.
    pub right_nonincreasing: bool,
    pub clamped: bool,
}

pub fn mesh_diagnostics(mesh: &LayerMesh) -> MeshDiagnostics {
    let n = mesh.n();
    let nf = n as f64;
    let h = mesh.steps();
    let x = mesh.nodes();
    let half = n / 2;

    let max_step = h.iter().copied().fold(0.0, f64::max);
    let min_step = h.iter().copied().fold(f64::INFINITY, f64::min);
    let max_jump = h
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);

    // Steps are differences of rounded nodes; allow a few ulps of the node.
    let slack = |i: usize| 4.0 * f64::EPSILON * x[i + 1].abs().max(x[i].abs());
    let left_nondecreasing = (1..half).all(|i| h[i - 1] <= h[i] + slack(i));
    let right_nonincreasing = (half + 1..n).all(|i| h[i - 1] + slack(i) >= h[i]);

    MeshDiagnostics {
        max_step_scaled: max_step * nf,
        max_step_jump_scaled: max_jump * nf * nf,
        min_step,
        max_step,
        left_nondecreasing,
        right_nonincreasing,
        clamped: mesh.is_clamped(),
    }
}
