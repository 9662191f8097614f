//! `f(x) = ½ xᵀHx + bᵀx` over a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::operators::{DenseOperator, HessianOperator, ObjectiveProblem};
use crate::{Matrix, Vector};

#[derive(Debug, Clone)]
pub struct QuadraticBoxProblem {
    h: DenseOperator,
    b: Vector,
    bounds: BoxBounds,
    x0: Vector,
    name: String,
}

impl QuadraticBoxProblem {
    /// `x0` defaults to the clamp of the origin.
    pub fn new(h: Matrix, b: Vector, bounds: BoxBounds, x0: Option<Vector>) -> Result<Self> {
        let n = h.nrows();
        for len in [h.ncols(), b.len(), bounds.dim()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let x0 = match x0 {
            Some(x) => {
                if x.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: x.len() });
                }
                bounds.check_feasible(&x)?;
                x
            }
            None => bounds.clamp(&Vector::zeros(n)),
        };
        Ok(Self {
            h: DenseOperator::new(h)?,
            b,
            bounds,
            x0,
            name: "quadratic".into(),
        })
    }

    fn named(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }

    pub fn hessian_matrix(&self) -> &Matrix {
        self.h.matrix()
    }

    pub fn linear(&self) -> &Vector {
        &self.b
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }
}

impl ObjectiveProblem for QuadraticBoxProblem {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.dot(&self.h.apply(x)) + self.b.dot(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.h.apply(x) + &self.b
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let hx = self.h.apply(x);
        (0.5 * x.dot(&hx) + self.b.dot(x), hx + &self.b)
    }

    fn hessian(&self, _x: &Vector) -> Box<dyn HessianOperator + '_> {
        Box::new(&self.h)
    }

    fn name(&self) -> &str {
        &self.name
    }
}

/// `H = [1 1; 1 2]`, `b = [1, 1]`, `l = [−5, 3]`, `u = [0, 8]`, `x0 = [−3, 7]`.
pub fn make_fig1_problem() -> QuadraticBoxProblem {
    QuadraticBoxProblem::new(
        Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]),
        Vector::from_vec(vec![1.0, 1.0]),
        BoxBounds::new(Vector::from_vec(vec![-5.0, 3.0]), Vector::from_vec(vec![0.0, 8.0])).unwrap(),
        Some(Vector::from_vec(vec![-3.0, 7.0])),
    )
    .unwrap()
    .named("fig1")
}

/// Random SPD quadratic on `[-1, 1]^n` with eigenvalues in `[0.1, 10]`.
///
/// Roughly one coordinate in ten gets an infinite lower bound. The unconstrained
/// minimizer is pushed outside the box so that several bounds are active.
pub fn random_convex_qp(n: usize, seed: u64) -> QuadraticBoxProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let eig = Vector::from_fn(n, |i, _| 0.1 * 100f64.powf(i as f64 / (n.max(2) - 1) as f64));
    let h = &q * Matrix::from_diagonal(&eig) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let b = Vector::from_fn(n, |_, _| 3.0 * rng.sample::<f64, _>(StandardNormal));
    let lower = Vector::from_fn(n, |_, _| if rng.random::<f64>() < 0.1 { f64::NEG_INFINITY } else { -1.0 });
    let bounds = BoxBounds::new(lower, Vector::from_element(n, 1.0)).unwrap();
    QuadraticBoxProblem::new(h, b, bounds, None).unwrap().named("random_qp")
}
