//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p spfit --test acceptance`.

mod common;

use common::{jacobian_mismatch, smoothed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spfit::experiments::{
    compare_reference, default_epsilons, default_ns, error_en, run_table, solve_example,
    uniformity_report, ConvergenceTable, RunSettings,
};
use spfit::notation::format_sci;
use spfit::{
    generating_function, newton_solve, stability_check, transition_point, Example, LayerMesh,
    MeshKind, MeshParams, NewtonSettings,
};

const TABLE_REL_TOL: f64 = 0.02;
const ORD_TOL: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn table(example: Example) -> ConvergenceTable {
    run_table(
        example,
        &default_epsilons(),
        &default_ns(),
        MeshKind::SmoothedShishkin,
        &RunSettings::default(),
    )
    .expect("default table runs")
}

fn table_reproduction(t: &ConvergenceTable) -> Outcome {
    let report = compare_reference(t).unwrap();
    let worst = report
        .cells
        .iter()
        .filter(|c| !c.suspect)
        .max_by(|a, b| a.rel_deviation.total_cmp(&b.rel_deviation))
        .unwrap();
    Outcome::new(
        report.passes(TABLE_REL_TOL, ORD_TOL),
        format!(
            "max |dE|/E {:.2}% (worst N={} eps=2^{}: {} vs {}), max |dOrd| {:.3}, {} unsolved",
            100.0 * report.max_rel_deviation,
            worst.n,
            worst.epsilon.log2(),
            format_sci(worst.computed, 5),
            format_sci(worst.reference, 5),
            report.max_ord_deviation,
            report.failed_cells
        ),
    )
}

fn criterion_1(t1: &ConvergenceTable) -> Outcome {
    table_reproduction(t1)
}

fn criterion_2(t2: &ConvergenceTable) -> Outcome {
    let base = table_reproduction(t2);
    let max_iter = t2.iter_cells().map(|c| c.iterations).max().unwrap();
    Outcome::new(
        base.pass && max_iter <= 10,
        format!("{}; max Newton iterations {max_iter}", base.detail),
    )
}

fn criterion_3(t1: &ConvergenceTable, t2: &ConvergenceTable) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for t in [t1, t2] {
        let u = uniformity_report(t);
        pass &= u.holds;
        let worst = u
            .rows
            .iter()
            .map(|r| r.sup_error / r.bound)
            .fold(0.0, f64::max);
        detail.push(format!(
            "example {}: C={:.4}, max sup/bound {:.3}",
            t.example, u.constant, worst
        ));
    }
    Outcome::new(pass, detail.join("; "))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    let mut trials = 0;
    for ex in Example::ALL {
        for k in [3, 7, 15] {
            let eps = 2f64.powi(-k);
            let bvp = ex.problem(eps).unwrap();
            let mesh = smoothed(64, eps);
            for _ in 0..100 {
                let mut draw = || {
                    let mut v: Vec<f64> = (0..=64).map(|_| rng.random_range(-1.0..=1.0)).collect();
                    v[0] = 0.0;
                    v[64] = 0.0;
                    v
                };
                let (u, v) = (draw(), draw());
                worst = worst.max(stability_check(&bvp, &mesh, &u, &v).unwrap().ratio);
                trials += 1;
            }
        }
    }
    Outcome::new(
        worst <= 1.0,
        format!("{trials} pairs, max m‖u−v‖/‖Fu−Fv‖ = {worst:.4}"),
    )
}

fn criterion_5(t1: &ConvergenceTable, t2: &ConvergenceTable) -> Outcome {
    let violations: usize = t1
        .iter_cells()
        .chain(t2.iter_cells())
        .map(|c| c.m_matrix_violations)
        .sum();
    let unchecked = t1
        .iter_cells()
        .chain(t2.iter_cells())
        .filter(|c| c.iterations == 0)
        .count();
    Outcome::new(
        violations == 0 && unchecked == 0,
        format!("{violations} violations over 160 solves"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for ex in Example::ALL {
        for _ in 0..20 {
            let y: Vec<f64> = (0..=32).map(|_| rng.random_range(-1.0..1.5)).collect();
            worst = worst.max(jacobian_mismatch(ex, &y));
        }
    }
    Outcome::new(
        worst <= 1e-5,
        format!("max relative mismatch {worst:.2e} over 40 states"),
    )
}

fn criterion_7() -> Outcome {
    let settings = NewtonSettings::default();
    let mut worst = 0.0f64;
    let mut pass = true;
    for &eps in &default_epsilons() {
        let bvp = Example::One.problem(eps).unwrap();
        for &n in &default_ns() {
            let mesh = smoothed(n, eps);
            let sol = newton_solve(&bvp, &mesh, -0.5, &settings).unwrap();
            let after_one = sol.residual_history[1];
            worst = worst.max(after_one);
            // the second update only confirms the stopping test
            pass &= after_one <= 1e-10 && sol.step_history[1] <= settings.tol;
        }
    }
    Outcome::new(
        pass,
        format!("max residual after one step {worst:.2e} over 80 solves"),
    )
}

fn criterion_8() -> Outcome {
    let eps = 2f64.powi(-10);
    let mut failures = Vec::new();
    let ns: Vec<usize> = (3..=13).map(|k| 1usize << k).collect();
    let mut base = None;
    let (mut worst_step, mut worst_jump) = (0.0f64, 0.0f64);
    for &n in &ns {
        let params = MeshParams::new(n, eps, 1.0);
        let mesh = LayerMesh::generate(&params, MeshKind::SmoothedShishkin).unwrap();
        let x = mesh.nodes();
        if !x.windows(2).all(|w| w[0] < w[1]) {
            failures.push(format!("N={n}: nodes not increasing"));
        }
        if (0..=n).any(|i| (x[n - i] - (1.0 - x[i])).abs() > 1e-14) {
            failures.push(format!("N={n}: asymmetric"));
        }
        let lam = transition_point(&params);
        if generating_function(&params, lam, 0.5).unwrap().to_bits() != 0.5f64.to_bits()
            || x[n / 2] != 0.5
        {
            failures.push(format!("N={n}: midpoint not exactly 1/2"));
        }
        let phi = |t: f64| generating_function(&params, lam, t).unwrap();
        for t0 in [params.q, 0.5] {
            let step = 1e-7;
            let left = (phi(t0) - phi(t0 - step)) / step;
            let right = (phi(t0 + step) - phi(t0)) / step;
            if (left - right).abs() > 1e-5 * left.abs().max(right.abs()) {
                failures.push(format!("N={n}: slope jump at t={t0}"));
            }
        }
        let d = mesh.diagnostics();
        if !(d.left_nondecreasing && d.right_nonincreasing) {
            failures.push(format!("N={n}: step sizes not monotone per half"));
        }
        let (s8, j8) = *base.get_or_insert((d.max_step_scaled, d.max_step_jump_scaled));
        let (rs, rj) = (d.max_step_scaled / s8, d.max_step_jump_scaled / j8);
        worst_step = worst_step.max(rs);
        worst_jump = worst_jump.max(rj);
        if rs > 1.5 {
            failures.push(format!("N={n}: max h·N is {rs:.3}x the N=8 value"));
        }
        if rj > 1.5 {
            failures.push(format!("N={n}: max |Δh|·N² is {rj:.3}x the N=8 value"));
        }
    }
    let summary = format!(
        "worst ratio to N=8: h·N {worst_step:.3}x, |Δh|·N² {worst_jump:.3}x; {} failures{}",
        failures.len(),
        failures
            .first()
            .map(|f| format!(", first: {f}"))
            .unwrap_or_default()
    );
    Outcome::new(failures.is_empty(), summary)
}

fn criterion_9() -> Outcome {
    let eps = 2f64.powi(-45);
    let n = 1 << 13;
    let mut pass = true;
    let mut detail = Vec::new();
    for (ex, want) in [(Example::One, 1.1996e-6), (Example::Two, 1.8493e-6)] {
        match solve_example(
            ex,
            eps,
            n,
            MeshKind::SmoothedShishkin,
            &RunSettings::default(),
        ) {
            Ok((bvp, sol)) => {
                let finite = sol.values.iter().all(|v| v.is_finite())
                    && sol.residual_history.iter().all(|v| v.is_finite())
                    && sol.step_history.iter().all(|v| v.is_finite());
                let e = error_en(bvp.exact_fn().unwrap().as_ref(), &sol);
                let rel = (e / want - 1.0).abs();
                pass &= finite && rel <= TABLE_REL_TOL;
                detail.push(format!(
                    "example {ex}: E_N {} vs {} ({:.1}%), finite={finite}",
                    format_sci(e, 5),
                    format_sci(want, 5),
                    100.0 * rel
                ));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("example {ex}: {e}"));
            }
        }
    }
    Outcome::new(pass, detail.join("; "))
}

fn main() {
    let t1 = table(Example::One);
    let t2 = table(Example::Two);
    let results = [
        ("1 table reproduction, example 1", criterion_1(&t1)),
        ("2 table reproduction, example 2", criterion_2(&t2)),
        (
            "3 epsilon-uniform ln^2 N / N^2 bound",
            criterion_3(&t1, &t2),
        ),
        ("4 stability inequality", criterion_4()),
        ("5 M-matrix certificate", criterion_5(&t1, &t2)),
        ("6 Jacobian vs finite differences", criterion_6()),
        ("7 linear problem in one Newton step", criterion_7()),
        ("8 mesh properties", criterion_8()),
        ("9 extreme parameters", criterion_9()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
