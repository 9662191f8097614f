//! Acceptance suite: one PASS/FAIL line per criterion, run sequentially so the
//! timing criterion is not disturbed by concurrent tests.
//!
//! `cargo test -p pnkhb --test acceptance -- --nocapture` shows the report.

mod common;

use std::time::{Duration, Instant};

use common::*;
use pnkhb::ipm::{self, woodbury_solve, IpmConfig};
use pnkhb::lanczos::{lanczos_tridiag, KrylovFactorization, LanczosOptions, ShiftedMetric};
use pnkhb::operators::DenseOperator;
use pnkhb::problems::{make_fig1_problem, make_synthetic_mlr, make_toy_ct, random_convex_qp, CtConfig, MlrConfig};
use pnkhb::solver::{projected_gradient_norm, solve_pncg_two_metric, solve_pnkhb, solve_projected_gradient};
use pnkhb::{ActiveSetMode, BoxBounds, Matrix, ObjectiveProblem, SolverConfig, SolverResult, Vector};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every solver run in the suite, kept for the invariant criterion.
#[derive(Default)]
struct Runs {
    checked: usize,
    iterations: usize,
    violations: Vec<String>,
}

impl Runs {
    fn record(&mut self, label: &str, r: &SolverResult, cfg: &SolverConfig) {
        self.checked += 1;
        self.iterations += r.iterations();
        for v in r.history.invariant_violations(cfg.alpha, cfg.ipm.tol) {
            self.violations.push(format!("{label}: {v:?}"));
        }
    }
}

fn run(id: usize, name: &str, limit: Duration, results: &mut Vec<bool>, body: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let o = body();
    let elapsed = start.elapsed();
    let pass = o.pass && elapsed < limit;
    let timing = format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs());
    println!("{} {id:>2}. {name}: {} ({timing})", if pass { "PASS" } else { "FAIL" }, o.detail);
    results.push(pass);
}

fn active_set(p: &dyn ObjectiveProblem, x: &Vector, tol: f64) -> Vec<usize> {
    let b = p.bounds();
    (0..x.len())
        .filter(|&i| (x[i] - b.lower()[i]).abs() <= tol || (x[i] - b.upper()[i]).abs() <= tol)
        .collect()
}

fn fig1_reproduction(runs: &mut Runs) -> Outcome {
    let p = make_fig1_problem();
    let cfg = SolverConfig { max_rank: 2, ..Default::default() };
    let r = solve_pnkhb(&p, p.x0(), &cfg).unwrap();
    runs.record("fig1 pnkhb", &r, &cfg);
    let err = (&r.x - Vector::from_vec(vec![-4.0, 3.0])).amax();
    let mu = r.history.records.first().map_or(f64::NAN, |rec| rec.step_size);
    outcome(
        r.iterations() == 1 && mu == 1.0 && err <= 1e-6,
        format!("iterations {}, mu {mu}, |x - [-4,3]| = {err:.1e}", r.iterations()),
    )
}

fn two_metric_stagnation(runs: &mut Runs) -> Outcome {
    let p = make_fig1_problem();
    let cfg = SolverConfig { max_rank: 2, max_outer: 1, ..Default::default() };
    let first = solve_pncg_two_metric(&p, p.x0(), &cfg).unwrap();
    runs.record("fig1 pncg", &first, &cfg);
    let first_err = (&first.x - Vector::from_vec(vec![-1.0, 3.0])).amax();
    let mut x = first.x.clone();
    let mut largest_move: f64 = 0.0;
    for _ in 0..5 {
        let r = solve_pncg_two_metric(&p, &x, &cfg).unwrap();
        runs.record("fig1 pncg restart", &r, &cfg);
        largest_move = largest_move.max((&r.x - &x).norm());
        x = r.x;
    }
    outcome(
        first_err <= 1e-6 && largest_move < 1e-10,
        format!("first iterate off [-1,3] by {first_err:.1e}, largest later move {largest_move:.1e}"),
    )
}

fn projection_oracle() -> Outcome {
    let mut g = rng(301);
    let cfg = IpmConfig { tol: 1e-10, ..Default::default() };
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..200 {
        let n = g.random_range(2..=6);
        let l = g.random_range(1..=n);
        let metric = random_metric(n, l, 1e-3, &mut g);
        let bounds = random_box(n, 0.15, &mut g);
        let y = normal_vector(n, &mut g) * 2.0;
        let err = match ipm::project(&metric, &y, &bounds, &cfg) {
            Ok((z, _)) => (&z - enumerate_projection(&dense_metric(&metric), &y, &bounds)).amax(),
            Err(_) => f64::INFINITY,
        };
        if err.is_nan() || err > 1e-6 {
            failures += 1;
        }
        worst = worst.max(err);
    }
    outcome(failures == 0, format!("200 instances, {failures} failures, worst error {worst:.1e}"))
}

/// Orthonormal basis from a QR factorization and a diagonally dominant tridiagonal core.
fn random_factorization(n: usize, l: usize, g: &mut rand_chacha::ChaCha8Rng) -> KrylovFactorization {
    let basis = Matrix::from_fn(n, l, |_, _| g.random::<f64>() - 0.5).qr().q();
    let alpha: Vec<f64> = (0..l).map(|_| g.random_range(1.0..10.0)).collect();
    let beta: Vec<f64> = (0..l.saturating_sub(1)).map(|_| g.random_range(-0.4..0.4)).collect();
    KrylovFactorization::from_parts(basis, alpha, beta).unwrap()
}

fn woodbury_correctness() -> Outcome {
    let mut g = rng(401);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = if case == 0 { 200 } else { g.random_range(10..=200) };
        let l = if case == 0 { 10 } else { g.random_range(1..=10) };
        let metric = ShiftedMetric::new(random_factorization(n, l, &mut g), 1e-3).unwrap();
        let e = Vector::from_fn(n, |_, _| g.random_range(0.1..10.0));
        let rhs = normal_vector(n, &mut g);
        let v = metric.factorization().basis();
        let mut dense = v * (metric.core()) * v.transpose();
        for i in 0..n {
            dense[(i, i)] += e[i];
        }
        let reference = dense.lu().solve(&rhs).unwrap();
        let x = woodbury_solve(&metric, &e, &rhs).unwrap();
        worst = worst.max((&x - &reference).norm() / reference.norm());
    }
    outcome(worst <= 1e-10, format!("100 instances up to n = 200, l = 10, worst relative error {worst:.1e}"))
}

fn linear_scaling() -> Outcome {
    let cfg = IpmConfig { tol: 1e-10, ..Default::default() };
    let mut per_iteration = Vec::new();
    for (n, reps) in [(4_000usize, 15), (40_000, 3)] {
        let mut g = rng(n as u64);
        let metric = ShiftedMetric::new(random_factorization(n, 10, &mut g), 1e-3).unwrap();
        let bounds = BoxBounds::uniform(n, -1.0, 1.0).unwrap();
        let y = normal_vector(n, &mut g) * 2.0;
        let mut samples = Vec::new();
        for _ in 0..reps {
            let start = Instant::now();
            let (_, report) = ipm::project(&metric, &y, &bounds, &cfg).unwrap();
            samples.push(start.elapsed().as_secs_f64() / report.iterations.max(1) as f64);
        }
        samples.sort_by(f64::total_cmp);
        per_iteration.push(samples[samples.len() / 2]);
    }
    let ratio = per_iteration[1] / per_iteration[0];
    outcome(
        (5.0..=20.0).contains(&ratio),
        format!(
            "per-iteration {:.2e}s at n = 4000, {:.2e}s at n = 40000, ratio {ratio:.1}",
            per_iteration[0], per_iteration[1]
        ),
    )
}

fn convex_convergence(runs: &mut Runs) -> Outcome {
    let cfg = SolverConfig { max_rank: 30, max_outer: 50, ..Default::default() };
    let mut worst_err: f64 = 0.0;
    let mut worst_pgn: f64 = 0.0;
    for seed in 0..20 {
        let p = random_convex_qp(30, 7000 + seed);
        let r = solve_pnkhb(&p, p.x0(), &cfg).unwrap();
        runs.record("random qp", &r, &cfg);
        let reference = coordinate_descent_qp(p.hessian_matrix(), p.linear(), p.bounds(), p.x0());
        worst_err = worst_err.max((&r.x - &reference).amax());
        worst_pgn = worst_pgn.max(projected_gradient_norm(&p, &r.x));
    }
    outcome(
        worst_err <= 1e-5 && worst_pgn <= 1e-6,
        format!("20 QPs, worst projected-gradient norm {worst_pgn:.1e}, worst distance to reference {worst_err:.1e}"),
    )
}

fn mlr_trend(runs: &mut Runs) -> Outcome {
    let p = make_synthetic_mlr(&MlrConfig::default()).unwrap();
    let x0 = Vector::zeros(p.dim());
    let long_cfg = SolverConfig { max_outer: 5000, diagnostics: false, ..Default::default() };
    let long = solve_projected_gradient(&p, &x0, &long_cfg).unwrap();
    runs.record("mlr reference", &long, &long_cfg);
    let reference = long.final_f();
    let target = reference + 1e-5;

    let newton_cfg = SolverConfig {
        max_rank: 20,
        max_outer: 100,
        active_set: ActiveSetMode::Augmented,
        ..Default::default()
    };
    let newton = solve_pnkhb(&p, &x0, &newton_cfg).unwrap();
    runs.record("mlr pnkhb", &newton, &newton_cfg);
    let pg_cfg = SolverConfig { max_outer: 1000, ..Default::default() };
    let pg = solve_projected_gradient(&p, &x0, &pg_cfg).unwrap();
    runs.record("mlr pg", &pg, &pg_cfg);

    let (Some((kn, an)), Some((kp, ap))) = (newton.history.first_reaching(target), pg.history.first_reaching(target)) else {
        return outcome(false, "a solver never reached the target".into());
    };
    let gap_n = newton.final_f() - reference;
    let gap_p = pg.final_f() - reference;
    outcome(
        kn < kp && an < ap && gap_n.abs() <= 1e-4 && gap_p.abs() <= 1e-4,
        format!(
            "target f* + 1e-5: pnkhb {kn} iterations / {an} applies, pg {kp} / {ap}; final gaps {gap_n:.1e}, {gap_p:.1e}"
        ),
    )
}

fn ct_active_sets(runs: &mut Runs) -> Outcome {
    let p = make_toy_ct(&CtConfig::default()).unwrap();
    let x0 = Vector::zeros(p.dim());
    let tight = p.truth().iter().filter(|&&v| v > p.bounds().upper()[0]).count();
    let ref_cfg = SolverConfig {
        max_outer: 20_000,
        gtol: 1e-10,
        xtol: 1e-14,
        diagnostics: false,
        ..Default::default()
    };
    let reference = solve_projected_gradient(&p, &x0, &ref_cfg).unwrap();
    runs.record("ct reference", &reference, &ref_cfg);
    let expected = active_set(&p, &reference.x, 1e-6);

    let mut all = tight > 0;
    let mut parts = vec![format!("{tight} true voxels above the bound, reference active set {}", expected.len())];
    for mode in [ActiveSetMode::None, ActiveSetMode::Boundary, ActiveSetMode::Augmented] {
        let cfg = SolverConfig {
            max_rank: p.dim(),
            max_outer: 200,
            active_set: mode,
            epsilon: Some(1e-5),
            ..Default::default()
        };
        let r = solve_pnkhb(&p, &x0, &cfg).unwrap();
        runs.record("ct pnkhb", &r, &cfg);
        let same = active_set(&p, &r.x, 1e-6) == expected;
        all &= r.status.is_converged() && same;
        parts.push(format!("{}: {} in {}, {}", mode.as_str(), r.status, r.iterations(), if same { "match" } else { "MISMATCH" }));
    }
    outcome(all, parts.join("; "))
}

fn invariants(runs: &Runs) -> Outcome {
    outcome(
        runs.violations.is_empty() && runs.checked > 0,
        format!(
            "{} runs, {} iterations, {} violations{}",
            runs.checked,
            runs.iterations,
            runs.violations.len(),
            runs.violations.first().map(|v| format!(", first {v}")).unwrap_or_default()
        ),
    )
}

fn lanczos_suite(runs: &Runs) -> Outcome {
    let mut g = rng(1001);
    let mut worst = [0.0f64; 3];
    let mut count = 0;
    let mut check = |m: &ShiftedMetric, seed: u64| {
        let d = m.diagnostics(8, seed);
        worst[0] = worst[0].max(d.orthonormality);
        worst[1] = worst[1].max(d.subspace_consistency);
        worst[2] = worst[2].max(d.spd_shortfall);
        count += 1;
    };
    for case in 0..60u64 {
        let n = g.random_range(5..=60);
        let l = g.random_range(1..=n.min(20));
        // Every third operator is indefinite.
        let (lo, hi) = if case % 3 == 0 { (-2.0, 5.0) } else { (0.01, 100.0) };
        let op = DenseOperator::new(random_spd(n, lo, hi, &mut g)).unwrap();
        let seed = normal_vector(n, &mut g);
        let opts = LanczosOptions { max_rank: l, curvature_floor: Some(1e-3), ..Default::default() };
        let fact = lanczos_tridiag(&op, &seed, &opts).unwrap();
        check(&ShiftedMetric::new(fact, 1e-3).unwrap(), case);
    }
    let mlr = make_synthetic_mlr(&MlrConfig { n_samples: 300, ..Default::default() }).unwrap();
    let ct = make_toy_ct(&CtConfig::default()).unwrap();
    let problems: [&dyn ObjectiveProblem; 2] = [&mlr, &ct];
    for p in problems {
        let x = pnkhb::config::random_feasible_points(p.bounds(), &Vector::zeros(p.dim()), 1, 5).remove(0);
        let h = p.hessian(&x);
        let seed = -p.gradient(&x);
        for l in [1, 5, 20, 40] {
            let opts = LanczosOptions { max_rank: l, curvature_floor: Some(1e-3), ..Default::default() };
            let fact = lanczos_tridiag(h.as_ref(), &seed, &opts).unwrap();
            check(&ShiftedMetric::new(fact, 1e-3).unwrap(), l as u64);
        }
    }
    let in_runs = runs.violations.iter().filter(|v| {
        v.contains("Orthonormality") || v.contains("SubspaceConsistency") || v.contains("PositiveDefinite")
    });
    let in_runs = in_runs.count();
    outcome(
        worst[0] <= 1e-10 && worst[1] <= 1e-10 && worst[2] <= 1e-10 && in_runs == 0,
        format!(
            "{count} standalone factorizations plus every solver iteration: orthonormality {:.1e}, consistency {:.1e}, SPD shortfall {:.1e}, {in_runs} violations in runs",
            worst[0], worst[1], worst[2]
        ),
    )
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    let mut runs = Runs::default();
    let s = Duration::from_secs;
    run(1, "two-variable example reproduction", s(1), &mut results, || fig1_reproduction(&mut runs));
    run(2, "two-metric stagnation witness", s(1), &mut results, || two_metric_stagnation(&mut runs));
    run(3, "projection oracle equivalence", s(30), &mut results, projection_oracle);
    run(4, "Woodbury correctness", s(10), &mut results, woodbury_correctness);
    run(6, "linear cost scaling", s(60), &mut results, linear_scaling);
    run(7, "convex convergence", s(30), &mut results, || convex_convergence(&mut runs));
    run(8, "MLR desk-scale trend", s(300), &mut results, || mlr_trend(&mut runs));
    run(9, "active-set identification", s(120), &mut results, || ct_active_sets(&mut runs));
    run(5, "descent and Armijo invariants", s(1), &mut results, || invariants(&runs));
    run(10, "Lanczos/metric property suite", s(60), &mut results, || lanczos_suite(&runs));
    let failed = results.iter().filter(|p| !**p).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
