//! Toy energy-windowed spectral CT reconstruction.
//!
//! Material weights `W` (`N_v × N_m`, column-major, material 1 first) map to
//! windowed photon counts
//!
//! ```text
//! Y(W) = exp(−A W Cᵀ) S      = (Sᵀ ⊗ I) exp(−(C ⊗ A) vec W)
//! ```
//!
//! with ray matrix `A` (`N_r × N_v`), attenuation table `C` (`N_e × N_m`) and
//! window spectra `S` (`N_e × N_b`). The objective is
//!
//! ```text
//! ½‖Y(W) − Y_obs‖² + γ₁/2 ‖D w₁‖² + γ₂ Σ_{m ≥ 2} Σ_i W[i, m]
//! ```
//!
//! where `D` is the forward-difference gradient of the first material image.
//! The Hessian is the Gauss-Newton matrix `JᵀJ + γ₁ DᵀD`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::operators::{GaussNewtonOperator, HessianOperator, ObjectiveProblem};
use crate::{Matrix, Vector};

/// Exponents `A W Cᵀ` above this magnitude are rejected.
pub const MAX_EXPONENT: f64 = 500.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CtConfig {
    pub image_side: usize,
    pub n_materials: usize,
    pub n_energies: usize,
    pub n_windows: usize,
    pub n_angles: usize,
    /// Noise standard deviation relative to the largest noiseless count.
    pub noise: f64,
    pub seed: u64,
    pub upper: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for CtConfig {
    fn default() -> Self {
        Self {
            image_side: 8,
            n_materials: 2,
            n_energies: 12,
            n_windows: 4,
            n_angles: 12,
            noise: 0.01,
            seed: 0,
            upper: 1.5,
            gamma1: 1e-3,
            gamma2: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralCtProblem {
    side: usize,
    rays: Matrix,
    attenuation: Matrix,
    spectra: Matrix,
    data: Matrix,
    truth: Vector,
    gamma1: f64,
    gamma2: f64,
    bounds: BoxBounds,
}

/// Parallel-beam line lengths on a `side × side` grid covering `[−½, ½]²`.
///
/// Rays are sampled at a tenth of a pixel; pixel `(ix, iy)` has column `ix + side·iy`.
pub fn ray_matrix(side: usize, n_angles: usize) -> Matrix {
    let h = 1.0 / side as f64;
    let n_det = (side as f64 * std::f64::consts::SQRT_2).ceil() as usize;
    let half = std::f64::consts::SQRT_2 / 2.0;
    let spacing = 2.0 * half / n_det as f64;
    let dt = h / 10.0;
    let samples = (2.0 * half / dt).ceil() as usize;
    let mut a = Matrix::zeros(n_det * n_angles, side * side);
    for p in 0..n_angles {
        let theta = std::f64::consts::PI * p as f64 / n_angles as f64;
        let (s, c) = theta.sin_cos();
        for d in 0..n_det {
            let t = (d as f64 + 0.5) * spacing - half;
            let row = p * n_det + d;
            for k in 0..samples {
                let tau = -half + (k as f64 + 0.5) * dt;
                let (x, y) = (t * -s + tau * c, t * c + tau * s);
                if !(-0.5..0.5).contains(&x) || !(-0.5..0.5).contains(&y) {
                    continue;
                }
                let ix = (((x + 0.5) / h) as usize).min(side - 1);
                let iy = (((y + 0.5) / h) as usize).min(side - 1);
                a[(row, ix + side * iy)] += dt;
            }
        }
    }
    a
}

/// `μ₁(e) = 0.5 + (40/e)³` and `μ₂(e) = 0.3 + 3 (40/e)³`; further materials scale the photoelectric part.
fn attenuation_table(energies: &[f64], n_materials: usize) -> Matrix {
    Matrix::from_fn(energies.len(), n_materials, |e, m| {
        let pe = (40.0 / energies[e]).powi(3);
        match m {
            0 => 0.5 + pe,
            1 => 0.3 + 3.0 * pe,
            _ => 0.2 + (m as f64 + 1.0) * pe,
        }
    })
}

/// Disc of 1.0 with an inner disc of 2.0 for material 1; two squares of 0.8 for material 2.
fn phantom(side: usize, n_materials: usize) -> Vector {
    let nv = side * side;
    let mut w = Vector::zeros(nv * n_materials);
    let h = 1.0 / side as f64;
    for iy in 0..side {
        for ix in 0..side {
            let (x, y) = ((ix as f64 + 0.5) * h - 0.5, (iy as f64 + 0.5) * h - 0.5);
            let i = ix + side * iy;
            if x * x + y * y <= 0.4 * 0.4 {
                w[i] = 1.0;
            }
            if (x - 0.1).powi(2) + (y + 0.05).powi(2) <= 0.16 * 0.16 {
                w[i] = 2.0;
            }
            if n_materials > 1 {
                let in_square = |cx: f64, cy: f64| (x - cx).abs() < 0.13 && (y - cy).abs() < 0.13;
                if in_square(-0.2, 0.2) || in_square(0.2, -0.3) {
                    w[nv + i] = 0.8;
                }
            }
        }
    }
    w
}

pub fn make_toy_ct(cfg: &CtConfig) -> Result<SpectralCtProblem> {
    let side = cfg.image_side;
    if side < 2 || side * side > 256 {
        return Err(Error::Problem(format!("ct image_side must satisfy 2 ≤ side and side² ≤ 256, got {side}")));
    }
    if cfg.n_materials == 0 || cfg.n_windows == 0 || cfg.n_angles == 0 || cfg.n_energies < cfg.n_windows {
        return Err(Error::Problem("ct needs materials, angles and windows ≥ 1 and energies ≥ windows".into()));
    }
    if !(cfg.upper > 0.0) || !(cfg.gamma1 >= 0.0) || !(cfg.gamma2 >= 0.0) || !(cfg.noise >= 0.0) {
        return Err(Error::Problem("ct upper must be positive and gamma1, gamma2, noise nonnegative".into()));
    }
    let energies: Vec<f64> = (0..cfg.n_energies)
        .map(|e| 40.0 + 80.0 * e as f64 / (cfg.n_energies.max(2) - 1) as f64)
        .collect();
    let attenuation = attenuation_table(&energies, cfg.n_materials);
    let per_window = cfg.n_energies as f64 / cfg.n_windows as f64;
    let spectra = Matrix::from_fn(cfg.n_energies, cfg.n_windows, |e, b| {
        if ((e as f64 / per_window) as usize).min(cfg.n_windows - 1) == b {
            1.0
        } else {
            0.0
        }
    });
    let rays = ray_matrix(side, cfg.n_angles);
    let truth = phantom(side, cfg.n_materials);
    let n = truth.len();
    let bounds = BoxBounds::uniform(n, 0.0, cfg.upper)?;

    let mut problem = SpectralCtProblem {
        side,
        rays,
        attenuation,
        spectra,
        data: Matrix::zeros(0, 0),
        truth,
        gamma1: cfg.gamma1,
        gamma2: cfg.gamma2,
        bounds,
    };
    let worst = problem.exponent(&Vector::from_element(n, cfg.upper).sup(&problem.truth)).max();
    if worst > MAX_EXPONENT {
        return Err(Error::Problem(format!("ct exponent {worst:.1} exceeds {MAX_EXPONENT}")));
    }
    let clean = problem.forward(&problem.truth);
    let sigma = cfg.noise * clean.amax();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    problem.data = clean.map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal));
    Ok(problem)
}

impl SpectralCtProblem {
    pub fn n_voxels(&self) -> usize {
        self.side * self.side
    }

    pub fn n_materials(&self) -> usize {
        self.attenuation.ncols()
    }

    pub fn truth(&self) -> &Vector {
        &self.truth
    }

    pub fn rays(&self) -> &Matrix {
        &self.rays
    }

    pub fn attenuation(&self) -> &Matrix {
        &self.attenuation
    }

    pub fn spectra(&self) -> &Matrix {
        &self.spectra
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    fn weights(&self, w: &Vector) -> Matrix {
        Matrix::from_column_slice(self.n_voxels(), self.n_materials(), w.as_slice())
    }

    /// `A W Cᵀ`.
    pub fn exponent(&self, w: &Vector) -> Matrix {
        &self.rays * self.weights(w) * self.attenuation.transpose()
    }

    /// `exp(−A W Cᵀ) S`.
    pub fn forward(&self, w: &Vector) -> Matrix {
        self.exponent(w).map(|q| (-q).exp()) * &self.spectra
    }

    /// `J u = vec((−E ∘ (A U Cᵀ)) S)` with `E = exp(−A W Cᵀ)`.
    fn jacobian_with(&self, e: &Matrix, u: &Vector) -> Vector {
        let inner = self.exponent(u).component_mul(e) * -1.0;
        let out = inner * &self.spectra;
        Vector::from_column_slice(out.as_slice())
    }

    /// `Jᵀ r = vec(Aᵀ (−E ∘ (R Sᵀ)) C)`.
    fn jacobian_t_with(&self, e: &Matrix, r: &Vector) -> Vector {
        let rmat = Matrix::from_column_slice(self.rays.nrows(), self.spectra.ncols(), r.as_slice());
        let inner = (rmat * self.spectra.transpose()).component_mul(e) * -1.0;
        let out = self.rays.tr_mul(&inner) * &self.attenuation;
        Vector::from_column_slice(out.as_slice())
    }

    fn transmission(&self, w: &Vector) -> Matrix {
        self.exponent(w).map(|q| (-q).exp())
    }

    pub fn jacobian(&self, w: &Vector, u: &Vector) -> Vector {
        self.jacobian_with(&self.transmission(w), u)
    }

    pub fn jacobian_t(&self, w: &Vector, r: &Vector) -> Vector {
        self.jacobian_t_with(&self.transmission(w), r)
    }

    /// Forward differences of the first material image, horizontal then vertical.
    fn image_gradient(&self, w1: &[f64]) -> Vector {
        let s = self.side;
        let mut out = Vec::with_capacity(2 * s * (s - 1));
        for iy in 0..s {
            for ix in 0..s - 1 {
                out.push(w1[ix + 1 + s * iy] - w1[ix + s * iy]);
            }
        }
        for iy in 0..s - 1 {
            for ix in 0..s {
                out.push(w1[ix + s * (iy + 1)] - w1[ix + s * iy]);
            }
        }
        Vector::from_vec(out)
    }

    /// `DᵀD` on the first material block, zero elsewhere.
    fn regularizer(&self, v: &Vector) -> Vector {
        let s = self.side;
        let dv = self.image_gradient(&v.as_slice()[..self.n_voxels()]);
        let mut out = Vector::zeros(v.len());
        let mut k = 0;
        for iy in 0..s {
            for ix in 0..s - 1 {
                out[ix + 1 + s * iy] += dv[k];
                out[ix + s * iy] -= dv[k];
                k += 1;
            }
        }
        for iy in 0..s - 1 {
            for ix in 0..s {
                out[ix + s * (iy + 1)] += dv[k];
                out[ix + s * iy] -= dv[k];
                k += 1;
            }
        }
        out
    }

    fn residual(&self, w: &Vector) -> (Matrix, Matrix) {
        let e = self.transmission(w);
        let r = &e * &self.spectra - &self.data;
        (e, r)
    }

    fn penalty(&self, w: &Vector) -> f64 {
        let nv = self.n_voxels();
        let dw = self.image_gradient(&w.as_slice()[..nv]);
        0.5 * self.gamma1 * dw.norm_squared() + self.gamma2 * w.as_slice()[nv..].iter().sum::<f64>()
    }

    fn gradient_from(&self, w: &Vector, e: &Matrix, r: &Matrix) -> Vector {
        let nv = self.n_voxels();
        let mut g = self.jacobian_t_with(e, &Vector::from_column_slice(r.as_slice()));
        g.axpy(self.gamma1, &self.regularizer(w), 1.0);
        for gi in g.as_mut_slice()[nv..].iter_mut() {
            *gi += self.gamma2;
        }
        g
    }
}

impl ObjectiveProblem for SpectralCtProblem {
    fn dim(&self) -> usize {
        self.truth.len()
    }

    fn bounds(&self) -> &BoxBounds {
        &self.bounds
    }

    fn value(&self, w: &Vector) -> f64 {
        let (_, r) = self.residual(w);
        0.5 * r.norm_squared() + self.penalty(w)
    }

    fn gradient(&self, w: &Vector) -> Vector {
        let (e, r) = self.residual(w);
        self.gradient_from(w, &e, &r)
    }

    fn value_and_gradient(&self, w: &Vector) -> (f64, Vector) {
        let (e, r) = self.residual(w);
        (0.5 * r.norm_squared() + self.penalty(w), self.gradient_from(w, &e, &r))
    }

    fn hessian(&self, w: &Vector) -> Box<dyn HessianOperator + '_> {
        let e = Arc::new(self.transmission(w));
        let e_t = Arc::clone(&e);
        let op = GaussNewtonOperator::new(
            self.dim(),
            Box::new(move |u: &Vector| self.jacobian_with(&e, u)),
            Box::new(move |r: &Vector| self.jacobian_t_with(&e_t, r)),
            Some(Box::new(move |v: &Vector| self.regularizer(v))),
            self.gamma1,
        )
        .expect("ct Jacobian dimensions are consistent by construction");
        Box::new(op)
    }

    fn name(&self) -> &str {
        "ct"
    }
}
