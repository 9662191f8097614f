//! Matrix-free symmetric operators and the objective abstraction.
//!
//! Every solver in this crate touches the Hessian only through
//! [`HessianOperator::apply`]. Operators are immutable once built, so a single
//! instance can be applied repeatedly, out of order, and from several threads.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// A symmetric linear map `v ↦ G v` on `R^n`.
pub trait HessianOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &Vector) -> Vector;
}

impl<T: HessianOperator + ?Sized> HessianOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &Vector) -> Vector {
        (**self).apply(v)
    }
}

impl<T: HessianOperator + ?Sized> HessianOperator for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &Vector) -> Vector {
        (**self).apply(v)
    }
}

impl<T: HessianOperator + ?Sized> HessianOperator for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, v: &Vector) -> Vector {
        (**self).apply(v)
    }
}

/// A twice differentiable objective over a box.
pub trait ObjectiveProblem: Send + Sync {
    fn dim(&self) -> usize;
    fn bounds(&self) -> &BoxBounds;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }

    /// Hessian (or Gauss-Newton approximation) at `x`.
    fn hessian(&self, x: &Vector) -> Box<dyn HessianOperator + '_>;

    fn name(&self) -> &str {
        "problem"
    }
}

/// Explicit symmetric matrix.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: Matrix,
}

impl DenseOperator {
    /// Accepts `m` when `max|m - mᵀ| ≤ 1e-12 · max(1, max|m|)`.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let scale = matrix.amax().max(1.0);
        let defect = (&matrix - matrix.transpose()).amax() / scale;
        if defect > 1e-12 {
            return Err(Error::NotSymmetric(defect));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

impl HessianOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, v: &Vector) -> Vector {
        &self.matrix * v
    }
}

pub type LinearMap<'a> = Box<dyn Fn(&Vector) -> Vector + Send + Sync + 'a>;

/// `G = Jᵀ J + γ R` from matrix-free Jacobian, adjoint and regularizer products.
pub struct GaussNewtonOperator<'a> {
    dim: usize,
    jacobian: LinearMap<'a>,
    jacobian_t: LinearMap<'a>,
    regularizer: Option<LinearMap<'a>>,
    gamma: f64,
}

impl<'a> GaussNewtonOperator<'a> {
    /// Probes each map once with a zero vector to check dimensions.
    pub fn new(
        dim: usize,
        jacobian: LinearMap<'a>,
        jacobian_t: LinearMap<'a>,
        regularizer: Option<LinearMap<'a>>,
        gamma: f64,
    ) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be nonnegative, got {gamma}")));
        }
        let residual = jacobian(&Vector::zeros(dim));
        let back = jacobian_t(&Vector::zeros(residual.len()));
        if back.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: back.len(),
            });
        }
        if let Some(reg) = &regularizer {
            let r = reg(&Vector::zeros(dim));
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
        }
        Ok(Self {
            dim,
            jacobian,
            jacobian_t,
            regularizer,
            gamma,
        })
    }

    pub fn apply_jacobian(&self, v: &Vector) -> Vector {
        (self.jacobian)(v)
    }

    pub fn apply_jacobian_t(&self, w: &Vector) -> Vector {
        (self.jacobian_t)(w)
    }
}

impl HessianOperator for GaussNewtonOperator<'_> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, v: &Vector) -> Vector {
        let mut out = (self.jacobian_t)(&(self.jacobian)(v));
        if let Some(reg) = &self.regularizer {
            if self.gamma != 0.0 {
                out.axpy(self.gamma, &reg(v), 1.0);
            }
        }
        out
    }
}

/// `(A ⊗ B) vec(X) = vec(B X Aᵀ)` for symmetric `A` (p×p) and `B` (q×q).
#[derive(Debug, Clone)]
pub struct KroneckerOperator {
    outer: Matrix,
    inner: Matrix,
}

impl KroneckerOperator {
    pub fn new(outer: Matrix, inner: Matrix) -> Result<Self> {
        let outer = DenseOperator::new(outer)?.matrix;
        let inner = DenseOperator::new(inner)?.matrix;
        Ok(Self { outer, inner })
    }
}

impl HessianOperator for KroneckerOperator {
    fn dim(&self) -> usize {
        self.outer.nrows() * self.inner.nrows()
    }
    fn apply(&self, v: &Vector) -> Vector {
        let (p, q) = (self.outer.nrows(), self.inner.nrows());
        let x = Matrix::from_column_slice(q, p, v.as_slice());
        let y = &self.inner * x * self.outer.transpose();
        Vector::from_column_slice(y.as_slice())
    }
}

pub(crate) fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    let v = Vector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        v
    }
}

/// Largest relative symmetry defect `|uᵀGv − vᵀGu| / (‖u‖‖v‖‖G‖)` over random pairs.
pub fn symmetry_defect(op: &dyn HessianOperator, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = op.dim();
    let mut probes = Vec::with_capacity(pairs);
    let mut norm_est: f64 = 0.0;
    for _ in 0..pairs {
        let u = random_unit_vector(n, &mut rng);
        let v = random_unit_vector(n, &mut rng);
        let gu = op.apply(&u);
        let gv = op.apply(&v);
        norm_est = norm_est.max(gu.norm()).max(gv.norm());
        probes.push((u, v, gu, gv));
    }
    if norm_est == 0.0 {
        return 0.0;
    }
    probes
        .iter()
        .map(|(u, v, gu, gv)| (u.dot(gv) - v.dot(gu)).abs() / norm_est)
        .fold(0.0, f64::max)
}

/// Central-difference gradient check over `directions` random unit directions.
///
/// For each direction the best of `h ∈ {1e-4, 1e-5, 1e-6}` is kept; the result
/// is the worst direction's relative error. Bounds are ignored.
pub fn check_gradient(problem: &dyn ObjectiveProblem, x: &Vector, directions: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = problem.gradient(x);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let d = random_unit_vector(x.len(), &mut rng);
        let slope = g.dot(&d);
        let best = [1e-4, 1e-5, 1e-6]
            .iter()
            .map(|&h| {
                let fp = problem.value(&(x + &d * h));
                let fm = problem.value(&(x - &d * h));
                let fd = (fp - fm) / (2.0 * h);
                (fd - slope).abs() / (slope.abs() + 1e-12)
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    worst
}
