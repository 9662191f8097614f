//! The projected Newton-Krylov outer loop and two baselines.
//!
//! All three methods share one loop: at `x_k` a step `s` and a projection
//! are chosen, and the projected arc `x(μ) = Π(x_k − μ s)` is searched with
//! Armijo backtracking on `f(x(μ)) < f(x_k) + α ∇f(x_k)ᵀ(x(μ) − x_k)`.
//!
//! | method | step `s` | projection |
//! |---|---|---|
//! | [`Method::Pnkhb`] | `H_k⁻¹∇f` | metric `H̃_k` (interior point) |
//! | [`Method::ProjectedGradient`] | `∇f` | Euclidean clamp |
//! | [`Method::PncgTwoMetric`] | `H_k⁻¹∇f` | Euclidean clamp |

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::active_set::{partitioned_direction, partitioned_project, ActiveSetMode, Partition, PartitionedMetric};
use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::history::{ConvergenceHistory, IterationRecord};
use crate::ipm::IpmConfig;
use crate::lanczos::{LanczosOptions, DEFAULT_SHIFT};
use crate::operators::{HessianOperator, ObjectiveProblem};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Pnkhb,
    ProjectedGradient,
    PncgTwoMetric,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pnkhb => "pnkhb",
            Method::ProjectedGradient => "projected_gradient",
            Method::PncgTwoMetric => "pncg_two_metric",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pnkhb" => Ok(Method::Pnkhb),
            "projected_gradient" | "pg" => Ok(Method::ProjectedGradient),
            "pncg_two_metric" | "pncg" => Ok(Method::PncgTwoMetric),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_outer: usize,
    pub max_linesearch: usize,
    /// Armijo parameter.
    pub alpha: f64,
    pub xtol: f64,
    pub gtol: f64,
    pub max_rank: usize,
    pub shift: f64,
    pub breakdown_tol: f64,
    pub active_set: ActiveSetMode,
    /// Active-set margin; `None` picks [`BoxBounds::default_epsilon`].
    pub epsilon: Option<f64>,
    pub ipm: IpmConfig,
    /// Start every line search at `μ = 1` instead of carrying `μ` over.
    pub strict_reset: bool,
    /// On line-search failure, try a projected-gradient step before giving up.
    pub gradient_fallback: bool,
    /// Record orthonormality/consistency/SPD probes of every metric.
    pub diagnostics: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer: 20,
            max_linesearch: 10,
            alpha: 1e-4,
            xtol: 1e-10,
            gtol: 1e-8,
            max_rank: 20,
            shift: DEFAULT_SHIFT,
            breakdown_tol: 1e-12,
            active_set: ActiveSetMode::None,
            epsilon: None,
            ipm: IpmConfig::default(),
            strict_reset: false,
            gradient_fallback: false,
            diagnostics: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.xtol > 0.0 && self.gtol > 0.0) {
            return bad("xtol and gtol must be positive".into());
        }
        if self.max_rank == 0 {
            return bad("max_rank must be positive".into());
        }
        if self.max_linesearch == 0 {
            return bad("max_linesearch must be positive".into());
        }
        if !(self.shift > 0.0 && self.shift.is_finite()) {
            return bad(format!("shift must be positive, got {}", self.shift));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0 && eps.is_finite()) {
                return bad(format!("epsilon must be nonnegative, got {eps}"));
            }
        }
        self.ipm.validate()
    }

    fn lanczos_options(&self) -> LanczosOptions {
        LanczosOptions {
            max_rank: self.max_rank,
            breakdown_tol: self.breakdown_tol,
            curvature_floor: Some(self.shift),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    ConvergedXtol,
    ConvergedGtol,
    MaxIterations,
    LinesearchFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::ConvergedXtol => "converged_xtol",
            Status::ConvergedGtol => "converged_gtol",
            Status::MaxIterations => "max_iterations",
            Status::LinesearchFailure => "linesearch_failure",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Status::ConvergedXtol | Status::ConvergedGtol)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: Vector,
    pub status: Status,
    pub method: Method,
    pub history: ConvergenceHistory,
}

impl SolverResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_f(&self) -> f64 {
        self.history.final_f()
    }
}

/// `‖x − clamp(x − ∇f(x))‖₂`.
pub fn projected_gradient_norm(problem: &dyn ObjectiveProblem, x: &Vector) -> f64 {
    projected_gradient_norm_with(problem.bounds(), x, &problem.gradient(x))
}

pub(crate) fn projected_gradient_norm_with(bounds: &BoxBounds, x: &Vector, grad: &Vector) -> f64 {
    (x - bounds.clamp(&(x - grad))).norm()
}

pub fn solve(method: Method, problem: &dyn ObjectiveProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolverResult> {
    match method {
        Method::Pnkhb => solve_pnkhb(problem, x0, cfg),
        Method::ProjectedGradient => solve_projected_gradient(problem, x0, cfg),
        Method::PncgTwoMetric => solve_pncg_two_metric(problem, x0, cfg),
    }
}

pub fn solve_pnkhb(problem: &dyn ObjectiveProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolverResult> {
    run(Method::Pnkhb, problem, x0, cfg)
}

pub fn solve_projected_gradient(problem: &dyn ObjectiveProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolverResult> {
    run(Method::ProjectedGradient, problem, x0, cfg)
}

/// Uses `cfg.active_set` as given; with [`ActiveSetMode::None`] nothing guards
/// against stalling at a clamped point.
pub fn solve_pncg_two_metric(problem: &dyn ObjectiveProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolverResult> {
    run(Method::PncgTwoMetric, problem, x0, cfg)
}

/// Counts objective, gradient and Hessian-vector evaluations.
struct Counted<'a> {
    inner: &'a dyn ObjectiveProblem,
    applies: AtomicUsize,
}

impl Counted<'_> {
    fn value(&self, x: &Vector) -> f64 {
        self.applies.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        self.applies.fetch_add(2, Ordering::Relaxed);
        self.inner.value_and_gradient(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.applies.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x)
    }

    fn count(&self) -> usize {
        self.applies.load(Ordering::Relaxed)
    }
}

struct CountedOperator<'a> {
    inner: Box<dyn HessianOperator + 'a>,
    applies: &'a AtomicUsize,
}

impl HessianOperator for CountedOperator<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &Vector) -> Vector {
        self.applies.fetch_add(1, Ordering::Relaxed);
        self.inner.apply(v)
    }
}

enum Projection {
    Clamp,
    Metric(PartitionedMetric),
}

struct Step {
    direction: Vector,
    projection: Projection,
    partition: Partition,
    rank: usize,
}

fn build_step(method: Method, counted: &Counted<'_>, x: &Vector, grad: &Vector, cfg: &SolverConfig) -> Result<Step> {
    let bounds = counted.inner.bounds();
    let n = x.len();
    if method == Method::ProjectedGradient {
        return Ok(Step {
            direction: grad.clone(),
            projection: Projection::Clamp,
            partition: Partition::all_inactive(n),
            rank: 0,
        });
    }
    let eps = cfg.epsilon.unwrap_or_else(|| bounds.default_epsilon());
    let partition = Partition::select(cfg.active_set, x, grad, bounds, eps);
    let hessian = CountedOperator {
        inner: counted.inner.hessian(x),
        applies: &counted.applies,
    };
    let ps = partitioned_direction(&hessian, grad, partition.clone(), &cfg.lanczos_options(), cfg.shift)?;
    let rank = ps.factorization.rank();
    Ok(Step {
        direction: ps.step,
        projection: if method == Method::Pnkhb {
            Projection::Metric(ps.metric)
        } else {
            Projection::Clamp
        },
        partition,
        rank,
    })
}

struct Trial {
    z: Vector,
    f: f64,
    mu: f64,
    trials: usize,
    projections: usize,
    ipm_iters: usize,
    ipm_unconverged: usize,
}

/// Backtracking on the projected arc; the flag is false when every trial failed.
fn line_search(
    counted: &Counted<'_>,
    x: &Vector,
    f: f64,
    grad: &Vector,
    step: &Step,
    mu0: f64,
    cfg: &SolverConfig,
) -> Result<(bool, Trial)> {
    let bounds = counted.inner.bounds();
    let mut out = Trial {
        z: x.clone(),
        f,
        mu: mu0,
        trials: 0,
        projections: 0,
        ipm_iters: 0,
        ipm_unconverged: 0,
    };
    let mut mu = mu0;
    let mut previous: Option<Vector> = None;
    for _ in 0..cfg.max_linesearch {
        out.trials += 1;
        let y = x - &step.direction * mu;
        let z = match &step.projection {
            Projection::Clamp => bounds.clamp(&y),
            Projection::Metric(metric) => {
                let start = if cfg.ipm.warm_start { previous.as_ref() } else { None };
                let (z, report) = partitioned_project(metric, &y, bounds, &cfg.ipm, start)?;
                out.projections += 1;
                out.ipm_iters += report.iterations;
                if !report.converged {
                    out.ipm_unconverged += 1;
                }
                z
            }
        };
        let ft = counted.value(&z);
        let d = &z - x;
        if ft < f + cfg.alpha * grad.dot(&d) {
            out.z = z;
            out.f = ft;
            out.mu = mu;
            return Ok((true, out));
        }
        previous = Some(z);
        mu /= 2.0;
    }
    Ok((false, out))
}

fn run(method: Method, problem: &dyn ObjectiveProblem, x0: &Vector, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let bounds = problem.bounds();
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    bounds.check_feasible(x0)?;
    let start = Instant::now();
    let counted = Counted {
        inner: problem,
        applies: AtomicUsize::new(0),
    };

    let mut x = x0.clone();
    let (mut f, mut grad) = counted.value_and_gradient(&x);
    let mut pgn = projected_gradient_norm_with(bounds, &x, &grad);
    let mut history = ConvergenceHistory {
        initial_f: f,
        initial_proj_grad_norm: pgn,
        initial_operator_applies: counted.count(),
        records: Vec::new(),
    };
    if pgn < cfg.gtol {
        return Ok(SolverResult {
            x,
            status: Status::ConvergedGtol,
            method,
            history,
        });
    }

    let mut status = Status::MaxIterations;
    let mut mu_next = 1.0;
    let mut mu_old: Option<f64> = None;
    for k in 1..=cfg.max_outer {
        let step = build_step(method, &counted, &x, &grad, cfg)?;
        let mu0 = if cfg.strict_reset { 1.0 } else { mu_next };
        let (mut accepted, mut trial) = line_search(&counted, &x, f, &grad, &step, mu0, cfg)?;
        let mut metric_used = matches!(step.projection, Projection::Metric(_));
        if !accepted && cfg.gradient_fallback && method != Method::ProjectedGradient {
            let fallback = Step {
                direction: grad.clone(),
                projection: Projection::Clamp,
                partition: Partition::all_inactive(x.len()),
                rank: 0,
            };
            let (ok, t) = line_search(&counted, &x, f, &grad, &fallback, 1.0, cfg)?;
            trial.trials += t.trials;
            if ok {
                accepted = true;
                metric_used = false;
                trial = Trial {
                    trials: trial.trials,
                    projections: trial.projections,
                    ipm_iters: trial.ipm_iters,
                    ipm_unconverged: trial.ipm_unconverged,
                    ..t
                };
            }
        }
        if !accepted {
            status = Status::LinesearchFailure;
            break;
        }

        let d = &trial.z - &x;
        let (metric_step, metric_diag) = match (&step.projection, metric_used) {
            (Projection::Metric(m), true) => (
                Some(m.quadratic_form(&d)),
                cfg.diagnostics.then(|| m.inactive_metric().diagnostics(4, k as u64)),
            ),
            _ => (None, None),
        };
        let grad_dot_step = grad.dot(&d);
        let grad_norm = grad.norm();
        let x_norm = x.norm();
        let f_prev = f;

        x = trial.z;
        f = trial.f;
        grad = counted.gradient(&x);
        pgn = projected_gradient_norm_with(bounds, &x, &grad);
        history.records.push(IterationRecord {
            k,
            f,
            f_prev,
            proj_grad_norm: pgn,
            step_size: trial.mu,
            ls_trials: trial.trials,
            n_projections: trial.projections,
            ipm_iters_total: trial.ipm_iters,
            ipm_unconverged: trial.ipm_unconverged,
            active_fraction: step.partition.active_fraction(),
            operator_applies: counted.count(),
            elapsed_seconds: start.elapsed().as_secs_f64(),
            grad_dot_step,
            metric_step,
            step_norm: d.norm(),
            grad_norm,
            lanczos_rank: step.rank,
            metric: metric_diag,
        });

        mu_next = if mu_old == Some(trial.mu) { (1.5 * trial.mu).min(1.0) } else { trial.mu };
        mu_old = Some(trial.mu);

        if pgn < cfg.gtol {
            status = Status::ConvergedGtol;
            break;
        }
        let step_norm = d.norm();
        if step_norm < cfg.xtol * x_norm || (x_norm == 0.0 && step_norm < cfg.xtol) {
            status = Status::ConvergedXtol;
            break;
        }
    }
    Ok(SolverResult {
        x,
        status,
        method,
        history,
    })
}
