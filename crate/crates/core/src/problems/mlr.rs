//! Multinomial logistic regression on random `tanh` features.
//!
//! Weights `X` are `n_c × m_f`, stored column-major in the optimization
//! vector. With features `D` (`m_f × N`), one-hot labels `C` and
//! `P = softmax(X D)` column-wise,
//!
//! ```text
//! f(X)   = −(1/N) Σ_j log P[c_j, j]
//! ∇f(X)  = (P − C) Dᵀ / N
//! ∇²f V  = (P ∘ A − P diag(1ᵀ(P ∘ A))) Dᵀ / N,   A = V D
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::operators::{HessianOperator, ObjectiveProblem};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct MlrConfig {
    pub n_classes: usize,
    /// Input dimension.
    pub n_f: usize,
    /// Feature dimension.
    pub m_f: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub bound: f64,
    /// Distance scale between class means.
    pub separation: f64,
}

impl Default for MlrConfig {
    fn default() -> Self {
        Self {
            n_classes: 5,
            n_f: 20,
            m_f: 100,
            n_samples: 2000,
            seed: 0,
            bound: 0.05,
            separation: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlrProblem {
    n_classes: usize,
    features: Matrix,
    labels: Vec<usize>,
    bounds: BoxBounds,
}

pub fn make_synthetic_mlr(cfg: &MlrConfig) -> Result<MlrProblem> {
    if cfg.n_classes < 2 || cfg.n_f == 0 || cfg.n_samples == 0 {
        return Err(Error::Problem("mlr needs n_classes ≥ 2, n_f ≥ 1 and n_samples ≥ 1".into()));
    }
    if cfg.m_f <= cfg.n_f {
        return Err(Error::Problem(format!("mlr needs m_f > n_f, got m_f = {} and n_f = {}", cfg.m_f, cfg.n_f)));
    }
    if !(cfg.bound > 0.0) {
        return Err(Error::Problem(format!("mlr bound must be positive, got {}", cfg.bound)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let means = Matrix::from_fn(cfg.n_f, cfg.n_classes, |_, _| cfg.separation * normal());
    let k = Matrix::from_fn(cfg.m_f, cfg.n_f, |_, _| normal());
    let labels: Vec<usize> = (0..cfg.n_samples).map(|j| j % cfg.n_classes).collect();
    let inputs = Matrix::from_fn(cfg.n_f, cfg.n_samples, |i, j| means[(i, labels[j])] + normal());
    let mut features = k * inputs / (cfg.n_f as f64).sqrt();
    features.apply(|v| *v = v.tanh());
    let n = cfg.n_classes * cfg.m_f;
    Ok(MlrProblem {
        n_classes: cfg.n_classes,
        features,
        labels,
        bounds: BoxBounds::uniform(n, -cfg.bound, cfg.bound)?,
    })
}

impl MlrProblem {
    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    fn weights(&self, x: &Vector) -> Matrix {
        Matrix::from_column_slice(self.n_classes, self.n_features(), x.as_slice())
    }

    /// Column-wise softmax of `X D`; every column lies on the unit simplex.
    pub fn probabilities(&self, x: &Vector) -> Matrix {
        let mut scores = self.weights(x) * &self.features;
        for mut col in scores.column_iter_mut() {
            let m = col.max();
            col.apply(|v| *v = (*v - m).exp());
            let s = col.sum();
            col /= s;
        }
        scores
    }

    fn value_from(&self, p: &Matrix) -> f64 {
        let n = self.n_samples();
        -self.labels.iter().enumerate().map(|(j, &c)| p[(c, j)].ln()).sum::<f64>() / n as f64
    }

    fn gradient_from(&self, mut p: Matrix) -> Vector {
        for (j, &c) in self.labels.iter().enumerate() {
            p[(c, j)] -= 1.0;
        }
        let g = p * self.features.transpose() / self.n_samples() as f64;
        Vector::from_column_slice(g.as_slice())
    }
}

impl ObjectiveProblem for MlrProblem {
    fn dim(&self) -> usize {
        self.n_classes * self.n_features()
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn value(&self, x: &Vector) -> f64 {
        self.value_from(&self.probabilities(x))
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.gradient_from(self.probabilities(x))
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let p = self.probabilities(x);
        (self.value_from(&p), self.gradient_from(p))
    }

    fn hessian(&self, x: &Vector) -> Box<dyn HessianOperator + '_> {
        Box::new(MlrHessian {
            problem: self,
            probs: self.probabilities(x),
        })
    }

    fn name(&self) -> &str {
        "mlr"
    }
}

struct MlrHessian<'a> {
    problem: &'a MlrProblem,
    probs: Matrix,
}

impl HessianOperator for MlrHessian<'_> {
    fn dim(&self) -> usize {
        self.problem.dim()
    }

    fn apply(&self, v: &Vector) -> Vector {
        let d = &self.problem.features;
        let mut u = self.problem.weights(v) * d;
        for (mut col, p) in u.column_iter_mut().zip(self.probs.column_iter()) {
            let pa = p.dot(&col);
            col.component_mul_assign(&p);
            col.axpy(-pa, &p, 1.0);
        }
        let out = u * d.transpose() / self.problem.n_samples() as f64;
        Vector::from_column_slice(out.as_slice())
    }
}
