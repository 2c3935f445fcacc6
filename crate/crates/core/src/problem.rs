//! Semilinear reaction-diffusion problems
//!
//! ```text
//! ε² y''(x) = f(x, y(x)),  x ∈ (0, 1),   y(0) = y(1) = 0,
//! ```
//!
//! with `∂f/∂y ≥ m > 0`. The boundary data is fixed at zero; the type has no
//! way to express anything else.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RhsFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ExactFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The continuous problem: right-hand side, its `y`-derivative, the lower
/// bound `m` on that derivative and the fitting constant `γ`.
#[derive(Clone)]
pub struct SemilinearBvp {
    name: String,
    f: RhsFn,
    f_y: RhsFn,
    m: f64,
    gamma: f64,
    exact: Option<ExactFn>,
}

impl fmt::Debug for SemilinearBvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SemilinearBvp")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("gamma", &self.gamma)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl SemilinearBvp {
    pub fn new<F, Fy>(name: impl Into<String>, f: F, f_y: Fy, m: f64, gamma: f64) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        Fy: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        check_constants(m, gamma)?;
        Ok(Self {
            name: name.into(),
            f: Arc::new(f),
            f_y: Arc::new(f_y),
            m,
            gamma,
            exact: None,
        })
    }

    pub fn with_exact<E>(mut self, exact: E) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// Replaces the fitting constant, keeping `γ ≥ m`.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        check_constants(self.m, gamma)?;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn f(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    #[inline]
    pub fn f_y(&self, x: f64, y: f64) -> f64 {
        (self.f_y)(x, y)
    }

    /// `ψ(x, y) = f(x, y) − γ y`, the part of `f` left over once the fitted
    /// linear operator `ε² d²/dx² − γ` is split off.
    #[inline]
    pub fn psi(&self, x: f64, y: f64) -> f64 {
        self.f(x, y) - self.gamma * y
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, x: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e(x))
    }

    pub fn exact_fn(&self) -> Option<&ExactFn> {
        self.exact.as_ref()
    }

    /// Samples `f_y` on a `grid × grid` lattice over `[0,1] × [y_lo, y_hi]`
    /// and reports where it leaves `[m, γ]`.
    pub fn validate_gamma(&self, y_lo: f64, y_hi: f64, grid: usize) -> Result<GammaReport> {
        if !(y_lo < y_hi) {
            return Err(Error::Config(format!(
                "need y_lo < y_hi, got [{y_lo}, {y_hi}]"
            )));
        }
        if grid < 2 {
            return Err(Error::Config(format!(
                "grid must be at least 2, got {grid}"
            )));
        }
        let last = (grid - 1) as f64;
        let mut report = GammaReport {
            min_f_y: f64::INFINITY,
            max_f_y: f64::NEG_INFINITY,
            argmin: (0.0, 0.0),
            argmax: (0.0, 0.0),
            below_m: false,
            above_gamma: false,
        };
        for i in 0..grid {
            let x = i as f64 / last;
            for j in 0..grid {
                let y = y_lo + (y_hi - y_lo) * (j as f64 / last);
                let v = self.f_y(x, y);
                if v < report.min_f_y {
                    report.min_f_y = v;
                    report.argmin = (x, y);
                }
                if v > report.max_f_y {
                    report.max_f_y = v;
                    report.argmax = (x, y);
                }
            }
        }
        report.below_m = report.min_f_y < self.m;
        report.above_gamma = report.max_f_y > self.gamma;
        Ok(report)
    }
}

fn check_constants(m: f64, gamma: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Config(format!("m must be positive, got {m}")));
    }
    if !(gamma >= m && gamma.is_finite()) {
        return Err(Error::Config(format!(
            "gamma must satisfy gamma >= m = {m}, got {gamma}"
        )));
    }
    Ok(())
}

/// Range of `f_y` over a probe box, with violated bounds flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaReport {
    pub min_f_y: f64,
    pub max_f_y: f64,
    pub argmin: (f64, f64),
    pub argmax: (f64, f64),
    /// `f_y < m` somewhere in the box.
    pub below_m: bool,
    /// `f_y > γ` somewhere in the box.
    pub above_gamma: bool,
}

impl GammaReport {
    pub fn ok(&self) -> bool {
        !self.below_m && !self.above_gamma
    }
}

/// The two benchmark problems with closed-form solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    /// Linear: `ε²y'' = y + cos²(πx) + 2(επ)² cos(2πx)`.
    #[serde(rename = "1")]
    One,
    /// Cubic: `ε²y'' = (y−1)(1+(y−1)²) + g(x)`.
    #[serde(rename = "2")]
    Two,
}

impl Example {
    pub const ALL: [Example; 2] = [Example::One, Example::Two];

    pub fn problem(self, epsilon: f64) -> Result<SemilinearBvp> {
        builtin_example(self, epsilon)
    }

    /// Constant starting value used for the Newton iteration.
    pub fn initial_guess(self) -> f64 {
        match self {
            Example::One => -0.5,
            Example::Two => 1.0,
        }
    }

    pub fn default_gamma(self) -> f64 {
        match self {
            Example::One => 1.0,
            Example::Two => 4.0,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Example::One => 1,
            Example::Two => 2,
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" | "example1" => Ok(Example::One),
            "2" | "two" | "example2" => Ok(Example::Two),
            other => Err(Error::Config(format!("unknown example '{other}'"))),
        }
    }
}

/// Builds one of the benchmark problems for a given `ε ∈ (0, 1)`.
pub fn builtin_example(id: Example, epsilon: f64) -> Result<SemilinearBvp> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let eps = epsilon;
    match id {
        Example::One => {
            let c = 2.0 * (eps * PI).powi(2);
            SemilinearBvp::new(
                "example1",
                move |x, y| {
                    let cx = (PI * x).cos();
                    y + cx * cx + c * (2.0 * PI * x).cos()
                },
                |_, _| 1.0,
                1.0,
                1.0,
            )
            .map(|p| {
                p.with_exact(move |x| {
                    let cx = (PI * x).cos();
                    layer_profile(x, eps) - cx * cx
                })
            })
        }
        Example::Two => SemilinearBvp::new(
            "example2",
            move |x, y| {
                let w = y - 1.0;
                w * (1.0 + w * w) + layer_profile(x, eps).powi(3)
            },
            |_, y| {
                let w = y - 1.0;
                1.0 + 3.0 * w * w
            },
            1.0,
            4.0,
        )
        .map(|p| p.with_exact(move |x| 1.0 - layer_profile(x, eps))),
    }
}

/// `(e^{−x/ε} + e^{−(1−x)/ε}) / (1 + e^{−1/ε})`, which also equals
/// `cosh((1−2x)/(2ε)) / cosh(1/(2ε))`. Only decaying exponentials are formed.
pub fn layer_profile(x: f64, epsilon: f64) -> f64 {
    ((-x / epsilon).exp() + (-(1.0 - x) / epsilon).exp()) / (1.0 + (-1.0 / epsilon).exp())
}
