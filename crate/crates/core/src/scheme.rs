//! Exponentially fitted three-point scheme.
//!
//! On every interval the operator `ε² d²/dx² − γ` is inverted exactly with
//! hyperbolic basis functions; `ψ = f − γy` is replaced by a 1-2-1 average of
//! its nodal values. With `t_j = β h_{j−1}`, `β = √γ/ε`, the coefficients are
//!
//! ```text
//! a_j = 1/sinh t_j,   d_j = 1/tanh t_j,   Δd_j = d_j − a_j = tanh(t_j/2)
//! ```
//!
//! and the interior equations read
//!
//! ```text
//! F_i y = γ/(Δd_i+Δd_{i+1}) · [ (3a_i + d_i + Δd_{i+1})(y_{i−1} − y_i)
//!                             − (3a_{i+1} + d_{i+1} + Δd_i)(y_i − y_{i+1})
//!                             − (f_{i−1} + 2f_i + f_{i+1})(Δd_i + Δd_{i+1})/γ ]
//! ```
//!
//! with `F_0 y = y_0` and `F_N y = y_N`.
//!
//! `β h` reaches ~10⁹ for tiny `ε` on the coarse part of the mesh, so no
//! `sinh`/`cosh` of `β h` is ever formed directly.

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::mesh::LayerMesh;
use crate::problem::SemilinearBvp;
use crate::solver::Tridiagonal;

/// `(a, d, Δd) = (1/sinh t, 1/tanh t, tanh(t/2))` without overflow.
///
/// For `t` large enough that `e^{−t}` underflows this returns the limits
/// `(0, 1, 1)`.
#[inline]
pub fn fitted_triplet(t: f64) -> (f64, f64, f64) {
    let decay = (-t).exp();
    // 1 − e^{−2t}, accurate for small t
    let den = -(-2.0 * t).exp_m1();
    let a = 2.0 * decay / den;
    let d = (1.0 + decay * decay) / den;
    (a, d, (0.5 * t).tanh())
}

/// `sinh(num) / sinh(den)` for `0 ≤ num ≤ den`, `den > 0`.
#[inline]
pub fn sinh_ratio(num: f64, den: f64) -> f64 {
    if num <= 0.0 {
        return 0.0;
    }
    (num - den).exp() * (-2.0 * num).exp_m1() / (-2.0 * den).exp_m1()
}

/// Per-interval coefficients; entry `j` belongs to `[x_j, x_{j+1}]`, so the
/// scheme's `a_i` is `a[i − 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedCoefficients {
    pub beta: f64,
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub dd: Vec<f64>,
}

impl FittedCoefficients {
    pub fn new(mesh: &LayerMesh, gamma: f64, epsilon: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        let beta = gamma.sqrt() / epsilon;
        let n = mesh.n();
        let mut a = Vec::with_capacity(n);
        let mut d = Vec::with_capacity(n);
        let mut dd = Vec::with_capacity(n);
        for (j, &h) in mesh.steps().iter().enumerate() {
            let t = beta * h;
            if !(t > 0.0) {
                return Err(Error::Config(format!(
                    "degenerate interval {j}: beta*h = {t}"
                )));
            }
            let (aj, dj, ddj) = fitted_triplet(t);
            a.push(aj);
            d.push(dj);
            dd.push(ddj);
        }
        Ok(Self { beta, a, d, dd })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Weights `(w_left, w_right, s)` of interior row `i`:
    /// `3a_i + d_i + Δd_{i+1}`, `3a_{i+1} + d_{i+1} + Δd_i` and
    /// `Δd_i + Δd_{i+1}`.
    #[inline]
    fn row_weights(&self, i: usize) -> (f64, f64, f64) {
        let (l, r) = (i - 1, i);
        let wl = 3.0 * self.a[l] + self.d[l] + self.dd[r];
        let wr = 3.0 * self.a[r] + self.d[r] + self.dd[l];
        (wl, wr, self.dd[l] + self.dd[r])
    }
}

fn check_state(mesh: &LayerMesh, y: &[f64]) -> Result<()> {
    check_len(mesh.n() + 1, y.len())?;
    if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(())
}

/// Discrete operator `F y`, length `N + 1`.
pub fn residual(
    bvp: &SemilinearBvp,
    coeffs: &FittedCoefficients,
    mesh: &LayerMesh,
    y: &[f64],
) -> Result<Vec<f64>> {
    check_state(mesh, y)?;
    check_len(mesh.n(), coeffs.len())?;
    let x = mesh.nodes();
    let n = mesh.n();
    let gamma = bvp.gamma();
    let fv: Vec<f64> = x.iter().zip(y).map(|(&xi, &yi)| bvp.f(xi, yi)).collect();

    let mut out = vec![0.0; n + 1];
    out[0] = y[0];
    out[n] = y[n];
    for i in 1..n {
        let (wl, wr, s) = coeffs.row_weights(i);
        let fsum = fv[i - 1] + 2.0 * fv[i] + fv[i + 1];
        out[i] = gamma / s * (wl * (y[i - 1] - y[i]) - wr * (y[i] - y[i + 1]) - fsum / gamma * s);
    }
    if let Some((index, &value)) = out.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(out)
}

/// Fréchet derivative `F'(y)`: identity boundary rows, and on interior rows
///
/// ```text
/// h_{i,i−1} = γ/s · [w_l − f_y(x_{i−1}, y_{i−1}) s/γ]
/// h_{i,i}   = γ/s · [−w_l − w_r − 2 f_y(x_i, y_i) s/γ]
/// h_{i,i+1} = γ/s · [w_r − f_y(x_{i+1}, y_{i+1}) s/γ]
/// ```
///
/// Since `w_l = 4a_i + s`, the off-diagonals equal
/// `γ/s · [s (1 − f_y/γ) + 4a]`, positive whenever `f_y ≤ γ`, and every
/// interior row has `|h_ii| − h_{i,i−1} − h_{i,i+1} = f_{y,i−1} + 2f_{y,i} + f_{y,i+1}`.
pub fn jacobian(
    bvp: &SemilinearBvp,
    coeffs: &FittedCoefficients,
    mesh: &LayerMesh,
    y: &[f64],
) -> Result<Tridiagonal> {
    check_state(mesh, y)?;
    check_len(mesh.n(), coeffs.len())?;
    let x = mesh.nodes();
    let n = mesh.n();
    let gamma = bvp.gamma();
    let fy: Vec<f64> = x.iter().zip(y).map(|(&xi, &yi)| bvp.f_y(xi, yi)).collect();

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n + 1];
    let mut sup = vec![0.0; n];
    diag[0] = 1.0;
    diag[n] = 1.0;
    // With 3a + d + Δd' = 4a + S the off-diagonals become 4γa/S + (γ − f_y);
    // assembling them in that form keeps a tiny 4a from being absorbed by S.
    for i in 1..n {
        let s = coeffs.dd[i - 1] + coeffs.dd[i];
        let scale = gamma / s;
        sub[i - 1] = 4.0 * scale * coeffs.a[i - 1] + (gamma - fy[i - 1]);
        sup[i] = 4.0 * scale * coeffs.a[i] + (gamma - fy[i + 1]);
        let (wl, wr, _) = coeffs.row_weights(i);
        diag[i] = scale * (-wl - wr - 2.0 * fy[i] / gamma * s);
    }
    Ok(Tridiagonal { sub, diag, sup })
}

/// `F` bundled with the problem, mesh and coefficients it is built from.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<'a> {
    bvp: &'a SemilinearBvp,
    mesh: &'a LayerMesh,
    coeffs: FittedCoefficients,
}

impl<'a> DiscreteOperator<'a> {
    pub fn new(bvp: &'a SemilinearBvp, mesh: &'a LayerMesh) -> Result<Self> {
        let coeffs = FittedCoefficients::new(mesh, bvp.gamma(), mesh.epsilon())?;
        Ok(Self { bvp, mesh, coeffs })
    }

    pub fn coefficients(&self) -> &FittedCoefficients {
        &self.coeffs
    }

    pub fn mesh(&self) -> &LayerMesh {
        self.mesh
    }

    pub fn bvp(&self) -> &SemilinearBvp {
        self.bvp
    }

    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>> {
        residual(self.bvp, &self.coeffs, self.mesh, y)
    }

    pub fn jacobian(&self, y: &[f64]) -> Result<Tridiagonal> {
        jacobian(self.bvp, &self.coeffs, self.mesh, y)
    }
}

/// Tallies of the M-matrix checks over one or more Jacobians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MMatrixSummary {
    pub matrices_checked: usize,
    /// Interior rows with a non-negative diagonal or a non-positive
    /// off-diagonal. An off-diagonal that is exactly zero because its
    /// coefficient `a` underflowed is counted in `underflow_zeros` instead.
    pub sign_violations: usize,
    /// Off-diagonals equal to `4γa/S` with `a` below the smallest
    /// subnormal: positive in exact arithmetic, zero in `f64`.
    pub underflow_zeros: usize,
    /// Interior rows with `|h_ii| − |h_{i,i−1}| − |h_{i,i+1}| ≤ 0`.
    pub dominance_violations: usize,
    /// Smallest row margin `|h_ii| − |h_{i,i−1}| − |h_{i,i+1}|`.
    pub min_row_margin: f64,
    /// Smallest `|h_ii| − |h_{i,i−1}| − |h_{i−1,i}|`.
    pub min_mixed_margin: f64,
    /// Rows whose margin fell below `4m` by more than rounding.
    pub margin_below_4m: usize,
}

impl Default for MMatrixSummary {
    fn default() -> Self {
        Self {
            matrices_checked: 0,
            sign_violations: 0,
            underflow_zeros: 0,
            dominance_violations: 0,
            min_row_margin: f64::INFINITY,
            min_mixed_margin: f64::INFINITY,
            margin_below_4m: 0,
        }
    }
}

impl MMatrixSummary {
    pub fn violations(&self) -> usize {
        self.sign_violations + self.dominance_violations
    }

    pub fn is_clean(&self) -> bool {
        self.violations() == 0
    }

    /// Folds the interior rows of `h` into the tally; `coeffs` are the
    /// coefficients `h` was assembled from and `m` is the problem's lower
    /// bound on `f_y`.
    pub fn record(&mut self, h: &Tridiagonal, coeffs: &FittedCoefficients, m: f64) {
        let n = h.diag.len() - 1;
        self.matrices_checked += 1;
        for i in 1..n {
            let (l, d, u) = (h.sub[i - 1], h.diag[i], h.sup[i]);
            let l_zero = l == 0.0 && coeffs.a[i - 1] == 0.0;
            let u_zero = u == 0.0 && coeffs.a[i] == 0.0;
            self.underflow_zeros += l_zero as usize + u_zero as usize;
            if !(d < 0.0 && (l > 0.0 || l_zero) && (u > 0.0 || u_zero)) {
                self.sign_violations += 1;
            }
            let margin = d.abs() - l.abs() - u.abs();
            if !(margin > 0.0) {
                self.dominance_violations += 1;
            }
            let slack = 64.0 * f64::EPSILON * d.abs();
            if margin < 4.0 * m - slack {
                self.margin_below_4m += 1;
            }
            self.min_row_margin = self.min_row_margin.min(margin);
            let above = h.sup[i - 1].abs();
            self.min_mixed_margin = self.min_mixed_margin.min(d.abs() - l.abs() - above);
        }
    }
}

/// Nodal solution of `F y = 0` with Newton diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteSolution {
    pub mesh: LayerMesh,
    pub values: Vec<f64>,
    /// Newton updates applied.
    pub iterations: usize,
    /// `‖F y‖∞` at the returned iterate.
    pub residual_norm: f64,
    /// `‖F y_k‖∞` for `k = 0 … iterations`.
    pub residual_history: Vec<f64>,
    /// `‖y_{k+1} − y_k‖∞` per update.
    pub step_history: Vec<f64>,
    pub m_matrix: Option<MMatrixSummary>,
    pub warnings: Vec<String>,
}

impl DiscreteSolution {
    pub fn nodes(&self) -> &[f64] {
        self.mesh.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Interval-constant approximation of `ψ` on `[x_i, x_{i+1}]`: the mean of
/// the 1-2-1 averages centred at `x_i` and `x_{i+1}`, or the plain two-point
/// mean on the first and last interval.
fn interval_psi(psi: impl Fn(usize) -> f64, i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5 * (psi(i) + psi(i + 1))
    } else {
        (psi(i - 1) + 3.0 * psi(i) + 3.0 * psi(i + 1) + psi(i + 2)) / 8.0
    }
}

/// Evaluates the local Green's-function representation between nodes:
///
/// ```text
/// y(x) ≈ ȳ_i u_i^I(x) + ȳ_{i+1} u_i^II(x) + (ψ̄/γ)(u_i^I(x) + u_i^II(x) − 1)
/// ```
///
/// where `u^I`, `u^II` are the hyperbolic hat functions of the interval and
/// the last term solves `ε²v'' − γv = ψ̄` with zero end values.
pub fn dense_output(
    bvp: &SemilinearBvp,
    sol: &DiscreteSolution,
    coeffs: &FittedCoefficients,
    x: f64,
) -> Result<f64> {
    let mesh = &sol.mesh;
    let i = mesh.locate(x)?;
    let nodes = mesh.nodes();
    let (xl, xr) = (nodes[i], nodes[i + 1]);
    if x == xl {
        return Ok(sol.values[i]);
    }
    if x == xr {
        return Ok(sol.values[i + 1]);
    }
    let beta = coeffs.beta;
    let t = beta * mesh.steps()[i];
    let u1 = sinh_ratio(beta * (xr - x), t);
    let u2 = sinh_ratio(beta * (x - xl), t);
    let y = &sol.values;
    let psi_bar = interval_psi(|j| bvp.psi(nodes[j], y[j]), i, mesh.n());
    Ok(y[i] * u1 + y[i + 1] * u2 + psi_bar / bvp.gamma() * (u1 + u2 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{MeshKind, MeshParams};
    use crate::problem::{Example, SemilinearBvp};

    #[test]
    fn triplet_at_one() {
        let (a, d, dd) = fitted_triplet(1.0);
        assert!((a - 1.0 / 1f64.sinh()).abs() < 1e-15);
        assert!((d - 1.0 / 1f64.tanh()).abs() < 1e-15);
        assert!((a - 0.850918).abs() < 5e-7);
        assert!((d - 1.313035).abs() < 5e-7);
        assert!((dd - 0.462117).abs() < 5e-7);
        assert!((dd - (d - a)).abs() < 1e-15);
    }

    #[test]
    fn triplet_large_arguments() {
        let (a, d, dd) = fitted_triplet(50.0);
        // 1/sinh(50) = 2e^{-50}/(1 - e^{-100}); the correction is far below f64 resolution
        assert!((a - 2.0 * (-50f64).exp()).abs() <= 1e-15 * a);
        assert!((a - 3.857e-22).abs() < 1e-25);
        assert_eq!(d, 1.0);
        assert_eq!(dd, 1.0);
        for &t in &[800.0, 1e9, f64::MAX] {
            assert_eq!(fitted_triplet(t), (0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn triplet_small_arguments() {
        for &t in &[1e-8, 1e-4, 1e-2] {
            let (a, d, dd) = fitted_triplet(t);
            assert!((a * t - 1.0).abs() < t);
            assert!((d * t - 1.0).abs() < t);
            assert!((dd - 0.5 * t).abs() < t * t);
        }
    }

    #[test]
    fn sinh_ratio_matches_direct_form() {
        for &(num, den) in &[(0.3, 1.0), (1.0, 1.0), (2.5, 7.0), (1e-3, 2e-3)] {
            let direct = f64::sinh(num) / f64::sinh(den);
            assert!((sinh_ratio(num, den) - direct).abs() < 1e-14 * direct.max(1e-300));
        }
        assert_eq!(sinh_ratio(0.0, 3.0), 0.0);
        assert_eq!(sinh_ratio(1e9, 1e9), 1.0);
        assert_eq!(sinh_ratio(1e9 - 100.0, 1e9), (-100f64).exp());
    }

    fn small_setup(ex: Example, eps: f64, n: usize) -> (SemilinearBvp, LayerMesh) {
        let p = ex.problem(eps).unwrap();
        let mesh = LayerMesh::generate(&MeshParams::new(n, eps, p.m()), MeshKind::SmoothedShishkin)
            .unwrap();
        (p, mesh)
    }

    #[test]
    fn residual_vanishes_for_pure_linear_problem() {
        let p = SemilinearBvp::new("lin", |_, y| 3.0 * y, |_, _| 3.0, 1.0, 3.0).unwrap();
        let mesh = LayerMesh::generate(&MeshParams::new(16, 0.01, 1.0), MeshKind::SmoothedShishkin)
            .unwrap();
        let c = FittedCoefficients::new(&mesh, 3.0, 0.01).unwrap();
        let r = residual(&p, &c, &mesh, &[0.0; 17]).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn residual_rejects_bad_input() {
        let (p, mesh) = small_setup(Example::One, 0.1, 8);
        let c = FittedCoefficients::new(&mesh, 1.0, 0.1).unwrap();
        let mut y = vec![0.0; 9];
        y[3] = f64::NAN;
        match residual(&p, &c, &mesh, &y) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            residual(&p, &c, &mesh, &[0.0; 8]),
            Err(Error::Length { .. })
        ));
    }

    #[test]
    fn example_one_off_diagonals_reduce_to_hyperbolic_weights() {
        let (p, mesh) = small_setup(Example::One, 2f64.powi(-5), 32);
        let c = FittedCoefficients::new(&mesh, 1.0, mesh.epsilon()).unwrap();
        let h = jacobian(&p, &c, &mesh, &vec![0.3; 33]).unwrap();
        for i in 1..32 {
            let s = c.dd[i - 1] + c.dd[i];
            let want_sub = 4.0 * c.a[i - 1] / s;
            let want_sup = 4.0 * c.a[i] / s;
            assert!((h.sub[i - 1] - want_sub).abs() <= 1e-12 * want_sub.abs().max(1.0));
            assert!((h.sup[i] - want_sup).abs() <= 1e-12 * want_sup.abs().max(1.0));
        }
        assert_eq!(
            (h.diag[0], h.sup[0], h.diag[32], h.sub[31]),
            (1.0, 0.0, 1.0, 0.0)
        );
    }

    #[test]
    fn jacobian_rows_carry_the_f_y_margin() {
        let (p, mesh) = small_setup(Example::Two, 2f64.powi(-7), 64);
        let c = FittedCoefficients::new(&mesh, 4.0, mesh.epsilon()).unwrap();
        let y: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|&x| 0.5 + 0.4 * (7.0 * x).sin())
            .collect();
        let h = jacobian(&p, &c, &mesh, &y).unwrap();
        let mut summary = MMatrixSummary::default();
        summary.record(&h, &c, 1.0);
        assert!(summary.is_clean());
        assert_eq!(summary.margin_below_4m, 0);
        let x = mesh.nodes();
        for i in 1..64 {
            let margin = h.diag[i].abs() - h.sub[i - 1] - h.sup[i];
            let fy =
                p.f_y(x[i - 1], y[i - 1]) + 2.0 * p.f_y(x[i], y[i]) + p.f_y(x[i + 1], y[i + 1]);
            assert!((margin - fy).abs() <= 1e-9 * h.diag[i].abs());
        }
    }

    #[test]
    fn dense_output_interpolates_nodes_and_blends_when_psi_vanishes() {
        let p = SemilinearBvp::new("lin", |_, y| 2.0 * y, |_, _| 2.0, 1.0, 2.0).unwrap();
        let mesh = LayerMesh::generate(&MeshParams::new(16, 0.05, 1.0), MeshKind::SmoothedShishkin)
            .unwrap();
        let c = FittedCoefficients::new(&mesh, 2.0, 0.05).unwrap();
        let values: Vec<f64> = (0..=16)
            .map(|i| {
                if i == 0 || i == 16 {
                    0.0
                } else {
                    (i as f64).sin()
                }
            })
            .collect();
        let sol = DiscreteSolution {
            mesh: mesh.clone(),
            values: values.clone(),
            iterations: 0,
            residual_norm: 0.0,
            residual_history: vec![],
            step_history: vec![],
            m_matrix: None,
            warnings: vec![],
        };
        for (i, &x) in mesh.nodes().iter().enumerate() {
            assert_eq!(dense_output(&p, &sol, &c, x).unwrap(), values[i]);
        }
        let i = 5;
        let (xl, xr) = (mesh.nodes()[i], mesh.nodes()[i + 1]);
        let x = xl + 0.3 * (xr - xl);
        let b = c.beta;
        let blend = values[i] * f64::sinh(b * (xr - x)) / f64::sinh(b * (xr - xl))
            + values[i + 1] * f64::sinh(b * (x - xl)) / f64::sinh(b * (xr - xl));
        assert!((dense_output(&p, &sol, &c, x).unwrap() - blend).abs() < 1e-13);
        assert!(dense_output(&p, &sol, &c, -0.1).is_err());
    }

    #[test]
    fn interval_psi_constant_is_exact_for_linear_data() {
        let lin = |j: usize| 2.0 + 0.5 * j as f64;
        for i in 0..10 {
            assert!((interval_psi(lin, i, 10) - (2.0 + 0.5 * (i as f64 + 0.5))).abs() < 1e-14);
        }
    }
}
