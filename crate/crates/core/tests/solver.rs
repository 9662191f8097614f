mod common;

use common::*;
use pnkhb::problems::{make_fig1_problem, make_synthetic_mlr, make_toy_ct, random_convex_qp, CtConfig, MlrConfig, QuadraticBoxProblem};
use pnkhb::solver::{projected_gradient_norm, solve, solve_pncg_two_metric, solve_pnkhb, solve_projected_gradient};
use pnkhb::{ActiveSetMode, BoxBounds, Matrix, Method, ObjectiveProblem, SolverConfig, SolverResult, Status, Vector};

fn assert_clean(result: &SolverResult, cfg: &SolverConfig, problem: &dyn ObjectiveProblem) {
    let v = result.history.invariant_violations(cfg.alpha, cfg.ipm.tol);
    assert!(v.is_empty(), "{:?}: {v:?}", result.method);
    assert!(problem.bounds().contains(&result.x));
    assert!(result.iterations() <= cfg.max_outer);
    for r in &result.history.records {
        assert!(r.ls_trials <= cfg.max_linesearch);
    }
}

fn qp_reference(p: &QuadraticBoxProblem) -> Vector {
    coordinate_descent_qp(p.hessian_matrix(), p.linear(), p.bounds(), p.x0())
}

#[test]
fn coordinate_descent_oracle_agrees_with_enumeration() {
    let p = random_convex_qp(6, 99);
    let a = qp_reference(&p);
    let b = enumerate_qp(p.hessian_matrix(), p.linear(), p.bounds());
    assert!((a - b).amax() < 1e-9);
}

#[test]
fn full_rank_pnkhb_solves_random_qps() {
    for seed in 0..5 {
        let p = random_convex_qp(30, 1000 + seed);
        let cfg = SolverConfig { max_rank: 30, max_outer: 50, ..Default::default() };
        let r = solve_pnkhb(&p, p.x0(), &cfg).unwrap();
        assert_clean(&r, &cfg, &p);
        assert!(r.status.is_converged(), "{:?}", r.status);
        assert!(projected_gradient_norm(&p, &r.x) <= 1e-6);
        assert!((&r.x - qp_reference(&p)).amax() < 1e-5);
    }
}

#[test]
fn partitioning_lets_two_metric_converge() {
    for seed in 0..3 {
        let p = random_convex_qp(20, 2000 + seed);
        let reference = qp_reference(&p);
        for mode in [ActiveSetMode::Boundary, ActiveSetMode::Augmented] {
            let cfg = SolverConfig {
                max_rank: 20,
                max_outer: 200,
                active_set: mode,
                ..Default::default()
            };
            let r = solve_pncg_two_metric(&p, p.x0(), &cfg).unwrap();
            assert_clean(&r, &cfg, &p);
            assert!((&r.x - &reference).amax() < 1e-5, "{mode:?} {:?}", r.status);
        }
    }
}

#[test]
fn active_set_variants_solve_random_qps() {
    let p = random_convex_qp(30, 3000);
    let reference = qp_reference(&p);
    for mode in [ActiveSetMode::Boundary, ActiveSetMode::Augmented] {
        let cfg = SolverConfig { max_rank: 30, max_outer: 100, active_set: mode, ..Default::default() };
        let r = solve_pnkhb(&p, p.x0(), &cfg).unwrap();
        assert_clean(&r, &cfg, &p);
        assert!((&r.x - &reference).amax() < 1e-5, "{mode:?} {:?}", r.status);
    }
}

#[test]
fn converged_point_is_a_fixed_point() {
    let p = random_convex_qp(15, 4000);
    let cfg = SolverConfig { max_rank: 15, max_outer: 50, ..Default::default() };
    let r = solve_pnkhb(&p, p.x0(), &cfg).unwrap();
    assert_eq!(r.status, Status::ConvergedGtol);
    assert!(projected_gradient_norm(&p, &r.x) <= cfg.gtol);
    let again = solve_pnkhb(&p, &r.x, &SolverConfig { max_outer: 1, ..cfg.clone() }).unwrap();
    assert!((&again.x - &r.x).norm() <= cfg.xtol * r.x.norm() + 10.0 * cfg.ipm.tol);
}

#[test]
fn linear_objective_reaches_vertex_in_one_gradient_step() {
    let p = QuadraticBoxProblem::new(
        Matrix::zeros(2, 2),
        Vector::from_vec(vec![1.0, -1.0]),
        BoxBounds::uniform(2, 0.0, 1.0).unwrap(),
        Some(Vector::from_vec(vec![0.5, 0.5])),
    )
    .unwrap();
    let r = solve_projected_gradient(&p, p.x0(), &SolverConfig::default()).unwrap();
    assert_eq!(r.history.records[0].step_size, 1.0);
    assert_eq!(r.x.as_slice(), &[0.0, 1.0]);
    assert_eq!(r.status, Status::ConvergedGtol);
}

#[test]
fn unit_condition_quadratic_one_gradient_step() {
    let p = QuadraticBoxProblem::new(
        Matrix::identity(4, 4),
        Vector::from_vec(vec![-0.1, 0.2, -0.3, 5.0]),
        BoxBounds::uniform(4, -1.0, 1.0).unwrap(),
        None,
    )
    .unwrap();
    let r = solve_projected_gradient(&p, p.x0(), &SolverConfig::default()).unwrap();
    assert_eq!(r.iterations(), 1);
    assert_eq!(r.history.records[0].step_size, 1.0);
    assert!((r.x - Vector::from_vec(vec![0.1, -0.2, 0.3, -1.0])).amax() < 1e-15);
}

#[test]
fn interior_optimum_two_metric_matches_pnkhb() {
    let mut g = rng(5);
    let h = random_spd(5, 0.5, 2.0, &mut g);
    let target = Vector::from_vec(vec![0.1, -0.2, 0.3, 0.0, 0.2]);
    let b = -(&h * &target);
    let p = QuadraticBoxProblem::new(h, b, BoxBounds::uniform(5, -1.0, 1.0).unwrap(), Some(Vector::from_element(5, 0.05))).unwrap();
    let cfg = SolverConfig { max_rank: 3, max_outer: 30, ..Default::default() };
    let a = solve_pnkhb(&p, p.x0(), &cfg).unwrap();
    let c = solve_pncg_two_metric(&p, p.x0(), &cfg).unwrap();
    assert_eq!(a.iterations(), c.iterations());
    assert!((&a.x - &c.x).amax() < 1e-8);
    assert!((&a.x - &target).amax() < 1e-6);
}

#[test]
fn strict_reset_always_starts_at_unit_step() {
    let p = random_convex_qp(30, 5000);
    let cfg = SolverConfig { max_rank: 30, strict_reset: true, max_outer: 30, ..Default::default() };
    let r = solve_projected_gradient(&p, p.x0(), &cfg).unwrap();
    assert_clean(&r, &cfg, &p);
    let carried = solve_projected_gradient(&p, p.x0(), &SolverConfig { strict_reset: false, ..cfg.clone() }).unwrap();
    let trials = |r: &SolverResult| r.history.records.iter().map(|x| x.ls_trials).sum::<usize>();
    assert!(trials(&r) > trials(&carried));
}

#[test]
fn linesearch_failure_is_reported_not_raised() {
    let p = make_fig1_problem();
    let cfg = SolverConfig { max_rank: 2, max_outer: 5, ..Default::default() };
    let r = solve(Method::PncgTwoMetric, &p, p.x0(), &cfg).unwrap();
    assert_eq!(r.status, Status::LinesearchFailure);
    assert!(p.bounds().contains(&r.x));
}

#[test]
fn invariants_hold_on_benchmark_problems() {
    let mlr = make_synthetic_mlr(&MlrConfig { n_samples: 300, m_f: 40, ..Default::default() }).unwrap();
    let ct = make_toy_ct(&CtConfig { image_side: 6, ..Default::default() }).unwrap();
    let problems: [(&dyn ObjectiveProblem, Vector); 2] = [(&mlr, Vector::zeros(mlr.dim())), (&ct, Vector::zeros(ct.dim()))];
    for (p, x0) in problems {
        for mode in [ActiveSetMode::None, ActiveSetMode::Boundary, ActiveSetMode::Augmented] {
            let cfg = SolverConfig { max_rank: 10, max_outer: 15, active_set: mode, ..Default::default() };
            for method in [Method::Pnkhb, Method::ProjectedGradient, Method::PncgTwoMetric] {
                let r = solve(method, p, &x0, &cfg).unwrap();
                assert_clean(&r, &cfg, p);
                assert!(r.final_f() < r.history.initial_f, "{} {method:?} {mode:?}", p.name());
            }
        }
    }
}

#[test]
fn identical_inputs_identical_histories() {
    let p = make_synthetic_mlr(&MlrConfig { n_samples: 200, m_f: 30, ..Default::default() }).unwrap();
    let cfg = SolverConfig { max_rank: 8, max_outer: 5, ..Default::default() };
    let a = solve_pnkhb(&p, &Vector::zeros(p.dim()), &cfg).unwrap();
    let b = solve_pnkhb(&p, &Vector::zeros(p.dim()), &cfg).unwrap();
    assert_eq!(a.x, b.x);
    let strip = |r: &SolverResult| r.history.records.iter().map(|x| (x.f, x.step_size, x.operator_applies)).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
}
