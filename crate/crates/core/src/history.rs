//! Per-iteration records and the runtime invariant checks applied to them.

use crate::lanczos::MetricDiagnostics;

/// One accepted outer iteration `x_k → x_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based outer iteration count.
    pub k: usize,
    /// `f(x_{k+1})`.
    pub f: f64,
    /// `f(x_k)`.
    pub f_prev: f64,
    /// Projected-gradient norm at `x_{k+1}`.
    pub proj_grad_norm: f64,
    /// Accepted step size `μ`.
    pub step_size: f64,
    pub ls_trials: usize,
    pub n_projections: usize,
    pub ipm_iters_total: usize,
    /// Projections that hit the IPM iteration limit.
    pub ipm_unconverged: usize,
    /// `|A_k| / n`.
    pub active_fraction: f64,
    /// Cumulative objective, gradient and Hessian-vector evaluations.
    pub operator_applies: usize,
    pub elapsed_seconds: f64,
    /// `∇f(x_k)ᵀ d` with `d = x_{k+1} − x_k`.
    pub grad_dot_step: f64,
    /// `dᵀ H̃ d`; `None` when the step was not a metric projection.
    pub metric_step: Option<f64>,
    pub step_norm: f64,
    pub grad_norm: f64,
    pub lanczos_rank: usize,
    pub metric: Option<MetricDiagnostics>,
}

impl IterationRecord {
    pub fn ipm_iters_avg(&self) -> f64 {
        if self.n_projections == 0 {
            0.0
        } else {
            self.ipm_iters_total as f64 / self.n_projections as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NotDecreasing,
    Armijo,
    Descent,
    Orthonormality,
    SubspaceConsistency,
    PositiveDefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub iteration: usize,
    pub kind: ViolationKind,
    /// How far the inequality missed.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceHistory {
    pub initial_f: f64,
    pub initial_proj_grad_norm: f64,
    pub initial_operator_applies: usize,
    pub records: Vec<IterationRecord>,
}

impl ConvergenceHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_f(&self) -> f64 {
        self.records.last().map_or(self.initial_f, |r| r.f)
    }

    pub fn final_proj_grad_norm(&self) -> f64 {
        self.records.last().map_or(self.initial_proj_grad_norm, |r| r.proj_grad_norm)
    }

    pub fn total_operator_applies(&self) -> usize {
        self.records.last().map_or(self.initial_operator_applies, |r| r.operator_applies)
    }

    pub fn total_projections(&self) -> usize {
        self.records.iter().map(|r| r.n_projections).sum()
    }

    pub fn total_ipm_iterations(&self) -> usize {
        self.records.iter().map(|r| r.ipm_iters_total).sum()
    }

    /// `f_k / |f_0|`, or `f_k` when `f_0 = 0`.
    pub fn relative_reduction(&self, f: f64) -> f64 {
        if self.initial_f == 0.0 {
            f
        } else {
            f / self.initial_f.abs()
        }
    }

    /// First iteration whose objective is `≤ target`, with its cumulative operator applies.
    pub fn first_reaching(&self, target: f64) -> Option<(usize, usize)> {
        if self.initial_f <= target {
            return Some((0, self.initial_operator_applies));
        }
        self.records.iter().find(|r| r.f <= target).map(|r| (r.k, r.operator_applies))
    }

    /// Checks strict decrease, the Armijo inequality with parameter `alpha`,
    /// the descent inequality `gᵀd ≤ −dᵀH̃d/μ + 100·ipm_tol·(1+‖d‖)·‖g‖`
    /// where a metric was recorded, and the metric diagnostics.
    pub fn invariant_violations(&self, alpha: f64, ipm_tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |iteration, kind, excess: f64| {
            if excess > 0.0 || excess.is_nan() {
                out.push(Violation { iteration, kind, excess });
            }
        };
        for r in &self.records {
            push(r.k, ViolationKind::NotDecreasing, if r.f < r.f_prev { 0.0 } else { r.f - r.f_prev + f64::MIN_POSITIVE });
            let armijo = r.f_prev + alpha * r.grad_dot_step;
            push(r.k, ViolationKind::Armijo, if r.f < armijo { 0.0 } else { r.f - armijo + f64::MIN_POSITIVE });
            if let Some(quad) = r.metric_step {
                let bound = -quad / r.step_size + 100.0 * ipm_tol * (1.0 + r.step_norm) * r.grad_norm;
                push(r.k, ViolationKind::Descent, r.grad_dot_step - bound);
            }
            if let Some(m) = r.metric {
                push(r.k, ViolationKind::Orthonormality, m.orthonormality - 1e-10);
                push(r.k, ViolationKind::SubspaceConsistency, m.subspace_consistency - 1e-10);
                push(r.k, ViolationKind::PositiveDefinite, m.spd_shortfall - 1e-10);
            }
        }
        out
    }
}
