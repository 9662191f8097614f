//! Reference solvers and random instance generators shared by the integration tests.
#![allow(dead_code)]

use pnkhb::lanczos::{lanczos_tridiag, LanczosOptions, ShiftedMetric};
use pnkhb::operators::DenseOperator;
use pnkhb::{BoxBounds, Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// SPD matrix with eigenvalues spread over `[lo, hi]`.
pub fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let eig = Vector::from_fn(n, |_, _| rng.random_range(lo..hi));
    let m = &q * Matrix::from_diagonal(&eig) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// `V (T − cI) Vᵀ + cI` assembled densely.
pub fn dense_metric(metric: &ShiftedMetric) -> Matrix {
    let n = metric.dim();
    let v = metric.factorization().basis();
    let mut m = v * metric.core() * v.transpose();
    for i in 0..n {
        m[(i, i)] += metric.shift();
    }
    m
}

/// Lanczos metric of rank `l` built from a random SPD matrix and seed.
pub fn random_metric(n: usize, l: usize, shift: f64, rng: &mut ChaCha8Rng) -> ShiftedMetric {
    let op = DenseOperator::new(random_spd(n, 0.1, 5.0, rng)).unwrap();
    let seed = normal_vector(n, rng);
    let opts = LanczosOptions {
        max_rank: l,
        curvature_floor: Some(shift),
        ..Default::default()
    };
    ShiftedMetric::new(lanczos_tridiag(&op, &seed, &opts).unwrap(), shift).unwrap()
}

/// Box around the origin; each side is infinite with probability `p_inf`.
pub fn random_box(n: usize, p_inf: f64, rng: &mut ChaCha8Rng) -> BoxBounds {
    let lower = Vector::from_fn(n, |_, _| {
        if rng.random::<f64>() < p_inf {
            f64::NEG_INFINITY
        } else {
            rng.random_range(-1.5..0.0)
        }
    });
    let upper = Vector::from_fn(n, |_, _| {
        if rng.random::<f64>() < p_inf {
            f64::INFINITY
        } else {
            rng.random_range(0.0..1.5)
        }
    });
    BoxBounds::new(lower, upper).unwrap()
}

/// `argmin ½ zᵀMz + cᵀz` over the box by enumerating every free/lower/upper pattern.
///
/// For each pattern the free block solves its stationarity equations; the
/// pattern is kept when the result is feasible and the multipliers have the
/// right signs. Among accepted patterns the lowest objective wins.
pub fn enumerate_qp(m: &Matrix, c: &Vector, bounds: &BoxBounds) -> Vector {
    let n = c.len();
    let (l, u) = (bounds.lower(), bounds.upper());
    let objective = |z: &Vector| 0.5 * z.dot(&(m * z)) + c.dot(z);
    let mut best: Option<(f64, Vector)> = None;
    let total = 3usize.pow(n as u32);
    'pattern: for code in 0..total {
        let mut pattern = vec![0u8; n];
        let mut rest = code;
        for p in pattern.iter_mut() {
            *p = (rest % 3) as u8;
            rest /= 3;
        }
        let mut z = Vector::zeros(n);
        let mut free = Vec::new();
        for i in 0..n {
            match pattern[i] {
                0 => free.push(i),
                1 if l[i].is_finite() => z[i] = l[i],
                2 if u[i].is_finite() => z[i] = u[i],
                _ => continue 'pattern,
            }
        }
        if !free.is_empty() {
            let mff = Matrix::from_fn(free.len(), free.len(), |a, b| m[(free[a], free[b])]);
            let rhs = Vector::from_fn(free.len(), |a, _| {
                let i = free[a];
                -c[i] - (0..n).filter(|j| pattern[*j] != 0).map(|j| m[(i, j)] * z[j]).sum::<f64>()
            });
            let Some(zf) = mff.lu().solve(&rhs) else { continue };
            for (a, &i) in free.iter().enumerate() {
                z[i] = zf[a];
            }
        }
        let g = m * &z + c;
        let scale = 1e-9 * (1.0 + g.amax());
        for i in 0..n {
            let ok = match pattern[i] {
                0 => z[i] >= l[i] - 1e-12 && z[i] <= u[i] + 1e-12,
                1 => g[i] >= -scale,
                _ => g[i] <= scale,
            };
            if !ok {
                continue 'pattern;
            }
        }
        let f = objective(&z);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, z));
        }
    }
    best.expect("a convex QP over a nonempty box has a KKT point").1
}

/// Metric projection `argmin ½ (z − y)ᵀ M (z − y)` by enumeration.
pub fn enumerate_projection(m: &Matrix, y: &Vector, bounds: &BoxBounds) -> Vector {
    enumerate_qp(m, &-(m * y), bounds)
}

/// `argmin ½ zᵀMz + cᵀz` by exact projected coordinate descent.
pub fn coordinate_descent_qp(m: &Matrix, c: &Vector, bounds: &BoxBounds, start: &Vector) -> Vector {
    let mut z = bounds.clamp(start);
    let mut g = m * &z + c;
    for _ in 0..200_000 {
        let mut change: f64 = 0.0;
        for i in 0..z.len() {
            let zi = (z[i] - g[i] / m[(i, i)]).clamp(bounds.lower()[i], bounds.upper()[i]);
            let dz = zi - z[i];
            if dz != 0.0 {
                z[i] = zi;
                g.axpy(dz, &m.column(i).into_owned(), 1.0);
                change = change.max(dz.abs());
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    z
}
