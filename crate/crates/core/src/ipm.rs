//! Primal-dual interior point solver for the metric projection
//!
//! ```text
//! min_z ½ (z − y)ᵀ H̃ (z − y)   subject to   l ≤ z ≤ u
//! ```
//!
//! rewritten with slacks `K z − b = w ≥ 0`, where the rows of `K` are `±e_i`
//! for every finite bound. Each Newton step on the perturbed KKT system
//! reduces to the normal equations
//!
//! ```text
//! (H̃ + Kᵀ W⁻¹ Λ K) Δz = −r + Kᵀ p
//! ```
//!
//! whose matrix is `V (T − cI) Vᵀ + E` with `E` diagonal, so the Woodbury
//! identity solves it in `O(n l²)`.

use nalgebra::DMatrix;

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::lanczos::ShiftedMetric;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmConfig {
    /// Centering parameter σ ∈ [0, 1].
    pub sigma: f64,
    /// Fraction-to-boundary parameter τ ∈ (0, 1].
    pub tau: f64,
    /// Tolerance on the dual residual, primal residual and largest complementarity product.
    pub tol: f64,
    pub max_iter: usize,
    /// Start from the previous projection when the solver re-projects within one line search.
    pub warm_start: bool,
}

impl Default for IpmConfig {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            tau: 0.995,
            tol: 1e-10,
            max_iter: 300,
            warm_start: true,
        }
    }
}

impl IpmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::InvalidParameter(format!("ipm.sigma must lie in [0, 1], got {}", self.sigma)));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidParameter(format!("ipm.tau must lie in (0, 1], got {}", self.tau)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("ipm.tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("ipm.max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Primal iterate `z`, slacks `w` and multipliers `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IpmState {
    pub z: Vector,
    pub w: Vector,
    pub lambda: Vector,
}

impl IpmState {
    /// `ξ = wᵀλ / m`.
    pub fn duality_measure(&self) -> f64 {
        if self.w.is_empty() {
            0.0
        } else {
            self.w.dot(&self.lambda) / self.w.len() as f64
        }
    }

    pub fn is_interior(&self) -> bool {
        self.w.iter().all(|&v| v > 0.0) && self.lambda.iter().all(|&v| v > 0.0)
    }

    /// `max_i w_i λ_i`.
    pub fn max_complementarity(&self) -> f64 {
        self.w.iter().zip(self.lambda.iter()).map(|(a, b)| a * b).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IpmReport {
    pub iterations: usize,
    /// `‖v‖₂ = ‖K z − b − w‖₂`.
    pub primal_residual: f64,
    /// `‖r‖₂ = ‖H̃ z − H̃ y − Kᵀλ‖₂`.
    pub dual_residual: f64,
    pub complementarity: f64,
    pub converged: bool,
    /// The returned point came from the active-set re-solve.
    pub polished: bool,
}

/// Newton direction of the perturbed KKT system together with the residuals it was built from.
#[derive(Debug, Clone)]
pub struct IpmDirection {
    pub dz: Vector,
    pub dw: Vector,
    pub dlambda: Vector,
    pub dual_residual: Vector,
    pub primal_residual: Vector,
}

/// `B C Bᵀ + s I` with `B` n×l (not necessarily orthonormal) and symmetric `C` l×l.
#[derive(Debug, Clone)]
pub struct LowRankQuadratic {
    basis: Matrix,
    core: Matrix,
    shift: f64,
}

impl LowRankQuadratic {
    pub fn new(basis: Matrix, core: Matrix, shift: f64) -> Result<Self> {
        if core.nrows() != basis.ncols() || !core.is_square() {
            return Err(Error::DimensionMismatch {
                expected: basis.ncols(),
                got: core.nrows(),
            });
        }
        Ok(Self { basis, core, shift })
    }

    pub fn from_metric(metric: &ShiftedMetric) -> Self {
        Self {
            basis: metric.factorization().basis().clone(),
            core: metric.core(),
            shift: metric.shift(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let mut out = v * self.shift;
        if self.rank() > 0 {
            let coeffs = &self.core * self.basis.tr_mul(v);
            out.gemv(1.0, &self.basis, &coeffs, 1.0);
        }
        out
    }

    /// Solves `(B C Bᵀ + diag(e)) x = rhs`; `e` replaces the shift.
    ///
    /// Uses `E⁻¹ − E⁻¹B (I + C BᵀE⁻¹B)⁻¹ C BᵀE⁻¹`, which stays valid when `C`
    /// is singular. The l×l system is solved by LU.
    pub fn solve_with_diagonal(&self, e: &Vector, rhs: &Vector) -> Result<Vector> {
        let n = self.dim();
        if e.len() != n || rhs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if e.len() != n { e.len() } else { rhs.len() },
            });
        }
        let e_inv_rhs = rhs.component_div(e);
        let l = self.rank();
        if l == 0 {
            return Ok(e_inv_rhs);
        }
        let mut scaled = self.basis.clone();
        for mut col in scaled.column_iter_mut() {
            col.component_div_assign(e);
        }
        let gram = self.basis.tr_mul(&scaled);
        let inner = DMatrix::identity(l, l) + &self.core * gram;
        let t = &self.core * self.basis.tr_mul(&e_inv_rhs);
        let x = inner.lu().solve(&t).ok_or(Error::SingularCore)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularCore);
        }
        let mut out = e_inv_rhs;
        out.gemv(-1.0, &scaled, &x, 1.0);
        Ok(out)
    }
}

/// `(V (T − cI) Vᵀ + E)⁻¹ rhs` for diagonal `E > 0`.
pub fn woodbury_solve(metric: &ShiftedMetric, e_diag: &Vector, rhs: &Vector) -> Result<Vector> {
    if e_diag.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("Woodbury diagonal must be positive".into()));
    }
    LowRankQuadratic::from_metric(metric).solve_with_diagonal(e_diag, rhs)
}

/// Largest `β ∈ (0, 1]` with `v + β Δv ≥ (1 − τ) v`.
pub fn fraction_to_boundary(v: &Vector, dv: &Vector, tau: f64) -> f64 {
    let mut beta = f64::INFINITY;
    for (&vi, &di) in v.iter().zip(dv.iter()) {
        if di < 0.0 {
            beta = beta.min(-vi / di);
        }
    }
    if beta.is_finite() {
        (tau * beta).min(1.0)
    } else {
        1.0
    }
}

/// One row `sign · z[index] − rhs ≥ 0` of `K z − b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub index: usize,
    pub sign: f64,
    pub rhs: f64,
}

/// The KKT system of `min ½ zᵀ M z − qᵀ z` over a box, with `M` low-rank plus shift.
#[derive(Debug, Clone)]
pub struct KktSystem {
    quad: LowRankQuadratic,
    linear: Vector,
    lower: Vector,
    upper: Vector,
    rows: Vec<BoundRow>,
}

impl KktSystem {
    pub fn new(quad: LowRankQuadratic, linear: Vector, bounds: &BoxBounds) -> Result<Self> {
        let n = quad.dim();
        if linear.len() != n || bounds.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if linear.len() != n { linear.len() } else { bounds.dim() },
            });
        }
        let mut rows = Vec::new();
        for i in 0..n {
            let (l, u) = (bounds.lower()[i], bounds.upper()[i]);
            if l.is_finite() {
                rows.push(BoundRow { index: i, sign: 1.0, rhs: l });
            }
            if u.is_finite() {
                rows.push(BoundRow { index: i, sign: -1.0, rhs: -u });
            }
        }
        Ok(Self {
            quad,
            linear,
            lower: bounds.lower().clone(),
            upper: bounds.upper().clone(),
            rows,
        })
    }

    /// The projection of `y` in the metric `H̃`: `M = H̃`, `q = H̃ y`.
    pub fn from_metric(metric: &ShiftedMetric, y: &Vector, bounds: &BoxBounds) -> Result<Self> {
        Self::new(LowRankQuadratic::from_metric(metric), metric.apply(y), bounds)
    }

    pub fn dim(&self) -> usize {
        self.quad.dim()
    }

    pub fn rows(&self) -> &[BoundRow] {
        &self.rows
    }

    pub fn quadratic(&self) -> &LowRankQuadratic {
        &self.quad
    }

    fn k_mul(&self, z: &Vector) -> Vector {
        Vector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.sign * z[r.index]))
    }

    fn kt_mul(&self, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.dim());
        for (row, &v) in self.rows.iter().zip(y.iter()) {
            out[row.index] += row.sign * v;
        }
        out
    }

    /// Strictly interior start: `z₀ = clamp(guess, l + δ, u − δ)` with
    /// `δ_i = min(1, u_i − l_i) / 100`, `w₀ = K z₀ − b`, `λ₀ = 1`.
    pub fn initial_state(&self, guess: &Vector) -> IpmState {
        let z = Vector::from_fn(self.dim(), |i, _| {
            let (l, u) = (self.lower[i], self.upper[i]);
            let delta = (u - l).min(1.0) / 100.0;
            let mut zi = guess[i];
            if l.is_finite() {
                zi = zi.max(l + delta);
            }
            if u.is_finite() {
                zi = zi.min(u - delta);
            }
            zi
        });
        let w = Vector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.sign * z[r.index] - r.rhs));
        let lambda = Vector::from_element(self.rows.len(), 1.0);
        IpmState { z, w, lambda }
    }

    /// Dual residual `r = M z − q − Kᵀλ` and primal residual `v = K z − b − w`.
    pub fn residuals(&self, state: &IpmState) -> (Vector, Vector) {
        let mut r = self.quad.apply(&state.z) - &self.linear;
        r -= self.kt_mul(&state.lambda);
        let v = Vector::from_iterator(
            self.rows.len(),
            self.rows.iter().zip(state.w.iter()).map(|(row, &w)| row.sign * state.z[row.index] - row.rhs - w),
        );
        (r, v)
    }

    /// Newton step on the perturbed KKT system with centering `σ`.
    pub fn newton_step(&self, state: &IpmState, sigma: f64) -> Result<IpmDirection> {
        let (r, v) = self.residuals(state);
        let xi = state.duality_measure();
        let m = self.rows.len();
        let ratio = state.lambda.component_div(&state.w);
        let p = Vector::from_fn(m, |i, _| {
            let (w, l) = (state.w[i], state.lambda[i]);
            (l * (-v[i] - w) + sigma * xi) / w
        });
        let mut e = Vector::from_element(self.dim(), self.quad.shift);
        for (row, &d) in self.rows.iter().zip(ratio.iter()) {
            e[row.index] += d;
        }
        let rhs = self.kt_mul(&p) - &r;
        let dz = self.quad.solve_with_diagonal(&e, &rhs)?;
        let kdz = self.k_mul(&dz);
        let dlambda = &p - ratio.component_mul(&kdz);
        let dw = &kdz + &v;
        Ok(IpmDirection {
            dz,
            dw,
            dlambda,
            dual_residual: r,
            primal_residual: v,
        })
    }

    /// Re-solves the equality-constrained problem on the active set guessed
    /// from `state` (rows with `w_i < λ_i`). Returns that minimizer when it is
    /// feasible and its multipliers have the right signs, both within `tol`.
    pub fn polish(&self, state: &IpmState, tol: f64) -> Option<Vector> {
        let n = self.dim();
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for (row, (&w, &lam)) in self.rows.iter().zip(state.w.iter().zip(state.lambda.iter())) {
            if w < lam {
                fixed[row.index] = Some(row.sign * row.rhs);
            }
        }
        let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
        let mut z = Vector::from_fn(n, |i, _| fixed[i].unwrap_or(0.0));
        if !free.is_empty() {
            let mz = self.quad.apply(&z);
            let rhs = Vector::from_iterator(free.len(), free.iter().map(|&i| self.linear[i] - mz[i]));
            let sub = LowRankQuadratic::new(self.quad.basis.select_rows(free.iter()), self.quad.core.clone(), self.quad.shift).ok()?;
            let zf = sub.solve_with_diagonal(&Vector::from_element(free.len(), self.quad.shift), &rhs).ok()?;
            for (k, &i) in free.iter().enumerate() {
                z[i] = zf[k];
            }
        }
        let g = self.quad.apply(&z) - &self.linear;
        for i in 0..n {
            let (l, u) = (self.lower[i], self.upper[i]);
            let ok = match fixed[i] {
                None => z[i] >= l - tol && z[i] <= u + tol,
                Some(v) if v == l => g[i] >= -tol,
                Some(_) => g[i] <= tol,
            };
            if !ok || !z[i].is_finite() {
                return None;
            }
        }
        Some(Vector::from_fn(n, |i, _| z[i].clamp(self.lower[i], self.upper[i])))
    }

    /// Iterates from `state` until all residuals and complementarity products fall below `cfg.tol`.
    pub fn solve(&self, mut state: IpmState, cfg: &IpmConfig) -> Result<(IpmState, IpmReport)> {
        // τ = 1 would land slacks exactly on zero.
        let tau = cfg.tau.min(1.0 - f64::EPSILON);
        let mut report = IpmReport::default();
        for it in 0..=cfg.max_iter {
            let (r, v) = self.residuals(&state);
            report = IpmReport {
                iterations: it,
                primal_residual: v.norm(),
                dual_residual: r.norm(),
                complementarity: state.max_complementarity(),
                converged: false,
                polished: false,
            };
            if report.dual_residual < cfg.tol && report.primal_residual < cfg.tol && report.complementarity < cfg.tol {
                report.converged = true;
                break;
            }
            if it == cfg.max_iter {
                break;
            }
            let dir = self.newton_step(&state, cfg.sigma)?;
            let beta = fraction_to_boundary(&state.w, &dir.dw, tau).min(fraction_to_boundary(&state.lambda, &dir.dlambda, tau));
            state.z.axpy(beta, &dir.dz, 1.0);
            state.w.axpy(beta, &dir.dw, 1.0);
            state.lambda.axpy(beta, &dir.dlambda, 1.0);
        }
        Ok((state, report))
    }
}

/// Metric projection of `y` onto the box.
pub fn project(metric: &ShiftedMetric, y: &Vector, bounds: &BoxBounds, cfg: &IpmConfig) -> Result<(Vector, IpmReport)> {
    project_from(metric, y, bounds, cfg, None)
}

/// [`project`] with an optional primal starting guess (e.g. the previous trial's projection).
///
/// Coordinates with `l_i = u_i` are fixed and eliminated. The remaining
/// problem is centred at `clamp(y)`, scaled by `ρ = ‖y − clamp(y)‖∞` and by a
/// bound on `‖H̃‖`, so the tolerance is relative to the distance being
/// projected; residuals in the report refer to that scaled problem. The
/// result is clamped to `[l, u]` exactly.
pub fn project_from(
    metric: &ShiftedMetric,
    y: &Vector,
    bounds: &BoxBounds,
    cfg: &IpmConfig,
    start: Option<&Vector>,
) -> Result<(Vector, IpmReport)> {
    cfg.validate()?;
    let n = metric.dim();
    for len in [y.len(), bounds.dim()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let center = bounds.clamp(y);
    let diff = &center - y;
    let rho = diff.amax();
    if rho == 0.0 {
        return Ok((
            y.clone(),
            IpmReport {
                converged: true,
                ..Default::default()
            },
        ));
    }

    let free: Vec<usize> = (0..n).filter(|&i| !bounds.is_fixed(i)).collect();
    if free.is_empty() {
        return Ok((
            center,
            IpmReport {
                converged: true,
                ..Default::default()
            },
        ));
    }
    let scale = metric.scale();
    let full_linear = metric.apply(&diff);
    let linear = Vector::from_iterator(free.len(), free.iter().map(|&i| -full_linear[i] / (scale * rho)));
    let basis = metric.factorization().basis().select_rows(free.iter());
    let quad = LowRankQuadratic::new(basis, metric.core() / scale, metric.shift() / scale)?;
    let local_bounds = BoxBounds::new(
        Vector::from_iterator(free.len(), free.iter().map(|&i| (bounds.lower()[i] - center[i]) / rho)),
        Vector::from_iterator(free.len(), free.iter().map(|&i| (bounds.upper()[i] - center[i]) / rho)),
    )?;
    let system = KktSystem::new(quad, linear, &local_bounds)?;

    let guess = match start {
        Some(s) if s.len() == n => Vector::from_iterator(free.len(), free.iter().map(|&i| (s[i] - center[i]) / rho)),
        _ => Vector::from_iterator(free.len(), free.iter().map(|&i| -diff[i] / rho)),
    };
    let (state, mut report) = system.solve(system.initial_state(&guess), cfg)?;
    let local = match system.polish(&state, 100.0 * cfg.tol) {
        Some(p) => {
            report.polished = true;
            report.converged = true;
            p
        }
        None => state.z,
    };

    let mut z = center;
    for (k, &i) in free.iter().enumerate() {
        z[i] += rho * local[k];
    }
    bounds.clamp_in_place(&mut z);
    Ok((z, report))
}
