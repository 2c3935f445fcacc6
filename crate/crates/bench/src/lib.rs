//! Fixtures shared by the criterion benches.

use spfit::{Example, LayerMesh, MeshKind, MeshParams, SemilinearBvp};

/// Problem and smoothed layer mesh for one (ε, N) pair.
pub fn fixture(example: Example, epsilon: f64, n: usize) -> (SemilinearBvp, LayerMesh) {
    let bvp = example.problem(epsilon).expect("valid epsilon");
    let mesh = LayerMesh::generate(
        &MeshParams::new(n, epsilon, bvp.m()),
        MeshKind::SmoothedShishkin,
    )
    .expect("valid mesh");
    (bvp, mesh)
}

/// Interior state held at the example's starting value.
pub fn flat_state(example: Example, n: usize) -> Vec<f64> {
    let mut y = vec![example.initial_guess(); n + 1];
    y[0] = 0.0;
    y[n] = 0.0;
    y
}
