//! Lanczos tridiagonalization with full reorthogonalization, and the two
//! operators built from it: the pseudoinverse `V T⁻¹ Vᵀ` that defines the
//! search direction and the shifted metric `V (T − cI) Vᵀ + cI` that defines
//! the projection.

use crate::error::{Error, Result};
use crate::operators::{random_unit_vector, HessianOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use crate::tridiagonal;
use crate::{Matrix, Vector};

/// Default Hessian shift `c`.
pub const DEFAULT_SHIFT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_rank: usize,
    /// Breakdown when `β_j ≤ breakdown_tol · ‖G v_j‖`.
    pub breakdown_tol: f64,
    /// When set, stop before `T` acquires an eigenvalue `≤ floor`.
    pub curvature_floor: Option<f64>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_rank: 20,
            breakdown_tol: 1e-12,
            curvature_floor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LanczosStop {
    MaxRank,
    Breakdown,
    /// The curvature guard truncated the basis (or floored a rank-one `T`).
    Curvature,
}

/// `G ≈ V T Vᵀ` with orthonormal `V` (n×l) and tridiagonal `T`.
#[derive(Debug, Clone)]
pub struct KrylovFactorization {
    basis: Matrix,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: f64,
    applies: usize,
    stop: LanczosStop,
}

impl KrylovFactorization {
    /// Rank-zero factorization on `R^n` (empty basis).
    pub fn empty(n: usize) -> Self {
        Self {
            basis: Matrix::zeros(n, 0),
            alpha: Vec::new(),
            beta: Vec::new(),
            gamma: 0.0,
            applies: 0,
            stop: LanczosStop::Breakdown,
        }
    }

    /// Builds a factorization from explicit parts. `basis` must have orthonormal columns.
    pub fn from_parts(basis: Matrix, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let l = basis.ncols();
        if alpha.len() != l {
            return Err(Error::DimensionMismatch { expected: l, got: alpha.len() });
        }
        if beta.len() != l.saturating_sub(1) {
            return Err(Error::DimensionMismatch {
                expected: l.saturating_sub(1),
                got: beta.len(),
            });
        }
        Ok(Self {
            basis,
            alpha,
            beta,
            gamma: 0.0,
            applies: 0,
            stop: LanczosStop::MaxRank,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn rank(&self) -> usize {
        self.alpha.len()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Norm of the seed vector.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Operator applications spent building the factorization.
    pub fn applies(&self) -> usize {
        self.applies
    }

    pub fn stop_reason(&self) -> LanczosStop {
        self.stop
    }

    pub fn tridiagonal(&self) -> Matrix {
        tridiagonal::to_dense(&self.alpha, &self.beta)
    }

    pub fn min_ritz_value(&self) -> f64 {
        tridiagonal::min_eigenvalue(&self.alpha, &self.beta)
    }

    pub fn max_ritz_value(&self) -> f64 {
        tridiagonal::max_eigenvalue(&self.alpha, &self.beta)
    }

    /// `V T Vᵀ v`.
    pub fn apply_low_rank(&self, v: &Vector) -> Vector {
        if self.rank() == 0 {
            return Vector::zeros(self.dim());
        }
        let coeffs = self.basis.tr_mul(v);
        &self.basis * tridiagonal::matvec(&self.alpha, &self.beta, &coeffs)
    }

    /// `V T⁻¹ Vᵀ v`, the pseudoinverse of the low-rank approximation.
    pub fn apply_pseudoinverse(&self, v: &Vector) -> Result<Vector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        if self.rank() == 0 {
            return Ok(Vector::zeros(self.dim()));
        }
        let coeffs = self.basis.tr_mul(v);
        let solved = tridiagonal::solve(&self.alpha, &self.beta, &coeffs)?;
        Ok(&self.basis * solved)
    }
}

/// Lanczos tridiagonalization of `op` started from `seed`.
///
/// Every new direction is reorthogonalized (twice) against the full basis.
/// With a curvature floor `c`, the step that would make `eigmin(T) ≤ c` is
/// discarded and the iteration stops; if the very first Rayleigh quotient is
/// already `≤ c`, the rank-one `T` is floored at `max(‖G v₁‖, 2c)` so the seed
/// direction survives.
pub fn lanczos_tridiag(op: &dyn HessianOperator, seed: &Vector, opts: &LanczosOptions) -> Result<KrylovFactorization> {
    let n = op.dim();
    if seed.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: seed.len() });
    }
    if opts.max_rank == 0 {
        return Err(Error::InvalidParameter("max_rank must be positive".into()));
    }
    let gamma = seed.norm();
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::ZeroSeed);
    }
    let max_rank = opts.max_rank.min(n);
    let mut columns: Vec<Vector> = Vec::with_capacity(max_rank);
    let mut alpha = Vec::with_capacity(max_rank);
    let mut beta: Vec<f64> = Vec::with_capacity(max_rank);
    let mut applies = 0;
    let mut stop = LanczosStop::MaxRank;

    let mut v = seed / gamma;
    loop {
        let j = columns.len();
        let gv = op.apply(&v);
        applies += 1;
        let gv_norm = gv.norm();
        let a = v.dot(&gv);

        alpha.push(a);
        if let Some(floor) = opts.curvature_floor {
            if !tridiagonal::shifted_is_positive_definite(&alpha, &beta, floor) {
                if j == 0 {
                    alpha[0] = gv_norm.max(2.0 * floor);
                    columns.push(v);
                } else {
                    alpha.pop();
                    beta.pop();
                }
                stop = LanczosStop::Curvature;
                break;
            }
        }

        let mut w = gv;
        w.axpy(-a, &v, 1.0);
        if j > 0 {
            w.axpy(-beta[j - 1], &columns[j - 1], 1.0);
        }
        columns.push(v);
        for _ in 0..2 {
            for q in &columns {
                let proj = q.dot(&w);
                w.axpy(-proj, q, 1.0);
            }
        }

        if columns.len() == max_rank {
            break;
        }
        let b = w.norm();
        if b <= opts.breakdown_tol * gv_norm.max(f64::MIN_POSITIVE) || b == 0.0 {
            stop = LanczosStop::Breakdown;
            break;
        }
        beta.push(b);
        v = w / b;
    }

    let basis = Matrix::from_columns(&columns);
    Ok(KrylovFactorization {
        basis: if columns.is_empty() { Matrix::zeros(n, 0) } else { basis },
        alpha,
        beta,
        gamma,
        applies,
        stop,
    })
}

/// `H̃ = V (T − cI) Vᵀ + cI`: equals `V T Vᵀ` on range(V) and `c·I` on its complement.
#[derive(Debug, Clone)]
pub struct ShiftedMetric {
    fact: KrylovFactorization,
    shift: f64,
}

impl ShiftedMetric {
    pub fn new(fact: KrylovFactorization, shift: f64) -> Result<Self> {
        if !(shift > 0.0 && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!("metric shift must be positive, got {shift}")));
        }
        Ok(Self { fact, shift })
    }

    /// `c·I` on `R^n`.
    pub fn scaled_identity(n: usize, shift: f64) -> Result<Self> {
        Self::new(KrylovFactorization::empty(n), shift)
    }

    pub fn factorization(&self) -> &KrylovFactorization {
        &self.fact
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn dim(&self) -> usize {
        self.fact.dim()
    }

    /// `(T − cI)` as a dense l×l matrix.
    pub fn core(&self) -> Matrix {
        let mut core = self.fact.tridiagonal();
        for i in 0..core.nrows() {
            core[(i, i)] -= self.shift;
        }
        core
    }

    /// `V (T − cI)(Vᵀ v) + c v`.
    pub fn apply(&self, v: &Vector) -> Vector {
        let mut out = v * self.shift;
        if self.fact.rank() > 0 {
            let coeffs = self.fact.basis.tr_mul(v);
            let mut t = tridiagonal::matvec(&self.fact.alpha, &self.fact.beta, &coeffs);
            t.axpy(-self.shift, &coeffs, 1.0);
            out.gemv(1.0, &self.fact.basis, &t, 1.0);
        }
        out
    }

    /// `vᵀ H̃ v`.
    pub fn quadratic_form(&self, v: &Vector) -> f64 {
        v.dot(&self.apply(v))
    }

    /// `min(c, eigmin(T))`, the smallest eigenvalue of `H̃` when `l < n`.
    pub fn lower_bound(&self) -> f64 {
        self.shift.min(self.fact.min_ritz_value())
    }

    /// Gershgorin bound on the largest eigenvalue of `H̃`.
    pub(crate) fn scale(&self) -> f64 {
        let (a, b) = (&self.fact.alpha, &self.fact.beta);
        let mut s = self.shift;
        for i in 0..a.len() {
            let mut r = a[i].abs();
            if i > 0 {
                r += b[i - 1].abs();
            }
            if i < b.len() {
                r += b[i].abs();
            }
            s = s.max(r);
        }
        s
    }
}

/// Measured defects of a metric against its defining properties.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricDiagnostics {
    /// `‖VᵀV − I‖_max`.
    pub orthonormality: f64,
    /// Largest `‖H̃ v − V T Vᵀ v‖∞ / ‖T‖` over random `v ∈ range(V)`.
    pub subspace_consistency: f64,
    /// Largest `min(c, eigmin T)‖v‖² − vᵀH̃v` over random unit `v` (negative when satisfied).
    pub spd_shortfall: f64,
}

impl ShiftedMetric {
    /// Probes orthonormality, subspace consistency and the SPD lower bound with `probes` random vectors.
    pub fn diagnostics(&self, probes: usize, seed: u64) -> MetricDiagnostics {
        let v = &self.fact.basis;
        let l = self.fact.rank();
        let orthonormality = if l == 0 {
            0.0
        } else {
            (v.tr_mul(v) - Matrix::identity(l, l)).amax()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t_scale = self.scale();
        let lower = self.lower_bound();
        let mut subspace_consistency: f64 = 0.0;
        let mut spd_shortfall = f64::NEG_INFINITY;
        for _ in 0..probes {
            if l > 0 {
                let coeffs = random_unit_vector(l, &mut rng);
                let x = v * &coeffs;
                let expected = v * tridiagonal::matvec(&self.fact.alpha, &self.fact.beta, &coeffs);
                subspace_consistency = subspace_consistency.max((self.apply(&x) - expected).amax() / t_scale);
            }
            let u = random_unit_vector(self.dim(), &mut rng);
            spd_shortfall = spd_shortfall.max(lower * u.norm_squared() - self.quadratic_form(&u));
        }
        MetricDiagnostics {
            orthonormality,
            subspace_consistency,
            spd_shortfall: if probes == 0 { 0.0 } else { spd_shortfall },
        }
    }
}

/// Free-function form of [`KrylovFactorization::apply_pseudoinverse`].
pub fn apply_pseudoinverse(fact: &KrylovFactorization, v: &Vector) -> Result<Vector> {
    fact.apply_pseudoinverse(v)
}

/// Free-function form of [`ShiftedMetric::apply`].
pub fn apply_metric(metric: &ShiftedMetric, v: &Vector) -> Vector {
    metric.apply(v)
}
