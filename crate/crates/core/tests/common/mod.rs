use spfit::{DiscreteOperator, Example, LayerMesh, MeshKind, MeshParams};

pub fn smoothed(n: usize, eps: f64) -> LayerMesh {
    LayerMesh::generate(&MeshParams::new(n, eps, 1.0), MeshKind::SmoothedShishkin).unwrap()
}

/// Column-by-column central differences of `F`, independent of the
/// analytic assembly.
pub fn fd_jacobian(op: &DiscreteOperator, y: &[f64]) -> Vec<Vec<f64>> {
    let n = y.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let delta = 1e-6 * y[j].abs().max(1.0);
        let mut plus = y.to_vec();
        let mut minus = y.to_vec();
        plus[j] += delta;
        minus[j] -= delta;
        let fp = op.residual(&plus).unwrap();
        let fm = op.residual(&minus).unwrap();
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * delta))
                .collect(),
        );
    }
    cols
}

fn dense_from_tridiagonal(op: &DiscreteOperator, y: &[f64]) -> Vec<Vec<f64>> {
    let h = op.jacobian(y).unwrap();
    let n = y.len();
    let mut cols = vec![vec![0.0; n]; n];
    for (j, col) in cols.iter_mut().enumerate() {
        col[j] = h.diag[j];
        if j > 0 {
            col[j - 1] = h.sup[j - 1];
        }
        if j + 1 < n {
            col[j + 1] = h.sub[j];
        }
    }
    cols
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0, |a: f64, v| a.max(v.abs()))
}

/// `‖J_fd − J‖max / ‖J‖max` at `y` for N = 32, ε = 2^-5.
pub fn jacobian_mismatch(example: Example, y: &[f64]) -> f64 {
    let eps = 2f64.powi(-5);
    let bvp = example.problem(eps).unwrap();
    let mesh = smoothed(32, eps);
    let op = DiscreteOperator::new(&bvp, &mesh).unwrap();
    let fd = fd_jacobian(&op, y);
    let an = dense_from_tridiagonal(&op, y);
    let diff: Vec<Vec<f64>> = fd
        .iter()
        .zip(&an)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    max_abs(&diff) / max_abs(&an)
}
