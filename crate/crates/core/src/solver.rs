//! Newton iteration for `F y = 0` with a tridiagonal direct solve.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, NonConvergence, Result};
use crate::mesh::LayerMesh;
use crate::problem::SemilinearBvp;
use crate::scheme::{DiscreteOperator, DiscreteSolution, MMatrixSummary};

/// Tridiagonal matrix of order `n + 1`. `sub[k]` is entry `(k+1, k)` and
/// `sup[k]` is entry `(k, k+1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::Config("empty tridiagonal matrix".into()));
        }
        check_len(n - 1, sub.len())?;
        check_len(n - 1, sup.len())?;
        Ok(Self { sub, diag, sup })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn mul_vec(&self, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.order();
        check_len(n, z.len())?;
        Ok((0..n)
            .map(|i| {
                let mut v = self.diag[i] * z[i];
                if i > 0 {
                    v += self.sub[i - 1] * z[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * z[i + 1];
                }
                v
            })
            .collect())
    }

    /// `max_i |h_ii|`.
    pub fn max_abs_diag(&self) -> f64 {
        self.diag.iter().fold(0.0, |acc, &d| acc.max(d.abs()))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        tridiag_solve(self, rhs)
    }
}

/// Forward elimination and back substitution without pivoting.
pub fn tridiag_solve(h: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = h.order();
    check_len(n, rhs.len())?;
    let mut c = vec![0.0; n];
    let mut z = vec![0.0; n];

    let mut pivot = h.diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = h.diag[i] - h.sub[i - 1] * c[i - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular { row: i, pivot });
        }
        if i + 1 < n {
            c[i] = h.sup[i] / pivot;
        }
        let carried = if i > 0 { h.sub[i - 1] * z[i - 1] } else { 0.0 };
        z[i] = (rhs[i] - carried) / pivot;
    }
    for i in (0..n - 1).rev() {
        z[i] -= c[i] * z[i + 1];
    }
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub check_m_matrix: bool,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            check_m_matrix: true,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Broadcast to the interior nodes.
    Constant(f64),
    /// Full nodal vector; the end values are overwritten with zero.
    Values(Vec<f64>),
}

impl From<f64> for InitialGuess {
    fn from(v: f64) -> Self {
        InitialGuess::Constant(v)
    }
}

impl From<Vec<f64>> for InitialGuess {
    fn from(v: Vec<f64>) -> Self {
        InitialGuess::Values(v)
    }
}

impl InitialGuess {
    fn materialize(&self, n: usize) -> Result<Vec<f64>> {
        let mut y = match self {
            InitialGuess::Constant(c) => vec![*c; n + 1],
            InitialGuess::Values(v) => {
                check_len(n + 1, v.len())?;
                v.clone()
            }
        };
        y[0] = 0.0;
        y[n] = 0.0;
        Ok(y)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, &x| acc.max(x.abs()))
}

/// Solves `F y = 0` by undamped Newton: `y ← y + z` with `F'(y) z = −F y`.
///
/// Stops once the update satisfies `‖z‖∞ ≤ tol · max(1, ‖y‖∞)` and the
/// residual satisfies `‖F y‖∞ ≤ tol · max(1, ‖y‖∞) · max_i |h_ii|`. The
/// residual is measured against the size of the Jacobian because the interior
/// rows scale like `ε²/h²`, so their rounding floor grows with it.
pub fn newton_solve(
    bvp: &SemilinearBvp,
    mesh: &LayerMesh,
    guess: impl Into<InitialGuess>,
    settings: &NewtonSettings,
) -> Result<DiscreteSolution> {
    settings.validate()?;
    let n = mesh.n();
    let op = DiscreteOperator::new(bvp, mesh)?;
    let mut y = guess.into().materialize(n)?;

    let mut r = op.residual(&y)?;
    let mut residual_history = vec![max_norm(&r)];
    let mut step_history = Vec::new();
    let mut m_matrix = settings.check_m_matrix.then(MMatrixSummary::default);

    let fail = |y: Vec<f64>, rh: Vec<f64>, sh: Vec<f64>| {
        Error::NonConvergence(Box::new(NonConvergence {
            iterations: sh.len(),
            last_iterate: y,
            residual_history: rh,
            step_history: sh,
        }))
    };

    for _ in 0..settings.max_iter {
        let h = op.jacobian(&y)?;
        if let Some(summary) = m_matrix.as_mut() {
            summary.record(&h, op.coefficients(), bvp.m());
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let z = match h.solve(&rhs) {
            Ok(z) => z,
            Err(_) => return Err(fail(y, residual_history, step_history)),
        };
        for (yi, zi) in y.iter_mut().zip(&z) {
            *yi += zi;
        }
        y[0] = 0.0;
        y[n] = 0.0;
        let step = max_norm(&z);
        step_history.push(step);

        r = match op.residual(&y) {
            Ok(r) => r,
            Err(_) => return Err(fail(y, residual_history, step_history)),
        };
        let rnorm = max_norm(&r);
        residual_history.push(rnorm);

        let scale = max_norm(&y).max(1.0);
        if step <= settings.tol * scale && rnorm <= settings.tol * scale * h.max_abs_diag() {
            let mut warnings = Vec::new();
            if let Some(s) = &m_matrix {
                if !s.is_clean() {
                    warnings.push(format!(
                        "M-matrix check failed: {} sign and {} dominance violations over {} Jacobians",
                        s.sign_violations, s.dominance_violations, s.matrices_checked
                    ));
                }
            }
            return Ok(DiscreteSolution {
                mesh: mesh.clone(),
                values: y,
                iterations: step_history.len(),
                residual_norm: rnorm,
                residual_history,
                step_history,
                m_matrix,
                warnings,
            });
        }
    }
    Err(fail(y, residual_history, step_history))
}

/// Both sides of `‖u − v‖ ≤ (1/m) ‖F u − F v‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub diff_norm: f64,
    pub residual_diff_norm: f64,
    /// `‖F u − F v‖ / m`.
    pub bound: f64,
    /// `m ‖u − v‖ / ‖F u − F v‖`, zero when `u = v`.
    pub ratio: f64,
}

impl StabilityReport {
    pub fn holds(&self) -> bool {
        self.ratio <= 1.0
    }
}

pub fn stability_check(
    bvp: &SemilinearBvp,
    mesh: &LayerMesh,
    u: &[f64],
    v: &[f64],
) -> Result<StabilityReport> {
    let op = DiscreteOperator::new(bvp, mesh)?;
    let fu = op.residual(u)?;
    let fv = op.residual(v)?;
    let diff_norm = u
        .iter()
        .zip(v)
        .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()));
    let residual_diff_norm = fu
        .iter()
        .zip(&fv)
        .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()));
    let ratio = if diff_norm == 0.0 {
        0.0
    } else {
        bvp.m() * diff_norm / residual_diff_norm
    };
    Ok(StabilityReport {
        diff_norm,
        residual_diff_norm,
        bound: residual_diff_norm / bvp.m(),
        ratio,
    })
}
