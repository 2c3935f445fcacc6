//! # spfit
//!
//! Solver for semilinear singularly perturbed reaction-diffusion problems
//!
//! ```text
//! ε² y'' = f(x, y),  0 < x < 1,   y(0) = y(1) = 0,   f_y ≥ m > 0,
//! ```
//!
//! using an exponentially fitted three-point scheme on a smoothed Shishkin
//! mesh. The nonlinear system is solved by Newton's method with a
//! tridiagonal direct solve; the error behaves like `C (ln N / N)²` with `C`
//! independent of `ε`.
//!
//! ```
//! use spfit::{Example, LayerMesh, MeshKind, MeshParams, NewtonSettings, newton_solve};
//!
//! let eps = 2f64.powi(-10);
//! let bvp = Example::Two.problem(eps).unwrap();
//! let mesh = LayerMesh::generate(&MeshParams::new(256, eps, bvp.m()), MeshKind::SmoothedShishkin).unwrap();
//! let sol = newton_solve(&bvp, &mesh, 1.0, &NewtonSettings::default()).unwrap();
//! let err = spfit::experiments::error_en(|x| bvp.exact(x).unwrap(), &sol);
//! assert!(err < 5e-3);
//! ```
//!
//! Modules:
//!
//! - [`problem`]: the continuous problem and the two benchmark examples
//! - [`mesh`]: smoothed Shishkin, Shishkin and uniform meshes
//! - [`scheme`]: fitted coefficients, discrete operator, Jacobian, dense output
//! - [`solver`]: tridiagonal solve, Newton iteration, stability check
//! - [`experiments`]: error tables, orders, reference data

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod mesh;
pub mod notation;
pub mod problem;
pub mod scheme;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{
    generating_function, transition_point, LayerMesh, MeshDiagnostics, MeshKind, MeshParams,
};
pub use problem::{builtin_example, Example, GammaReport, SemilinearBvp};
pub use scheme::{
    dense_output, jacobian, residual, DiscreteOperator, DiscreteSolution, FittedCoefficients,
    MMatrixSummary,
};
pub use solver::{
    newton_solve, stability_check, tridiag_solve, InitialGuess, NewtonSettings, StabilityReport,
    Tridiagonal,
};
