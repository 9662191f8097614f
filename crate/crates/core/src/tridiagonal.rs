//! Symmetric tridiagonal helpers: LDLᵀ solves, inertia and the smallest eigenvalue.

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Pivots of the LDLᵀ factorization of `T - shift·I`, or `None` on an exact zero pivot.
pub(crate) fn ldlt_pivots(alpha: &[f64], beta: &[f64], shift: f64) -> Option<Vec<f64>> {
    let mut pivots = Vec::with_capacity(alpha.len());
    for (j, &a) in alpha.iter().enumerate() {
        let d = if j == 0 {
            a - shift
        } else {
            let prev = pivots[j - 1];
            a - shift - beta[j - 1] * beta[j - 1] / prev
        };
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        pivots.push(d);
    }
    Some(pivots)
}

/// `T - shift·I` is positive definite iff every LDLᵀ pivot is positive.
pub(crate) fn shifted_is_positive_definite(alpha: &[f64], beta: &[f64], shift: f64) -> bool {
    match ldlt_pivots(alpha, beta, shift) {
        Some(p) => p.iter().all(|&d| d > 0.0),
        None => false,
    }
}

/// Solves `T x = rhs` with an unpivoted LDLᵀ factorization, `O(l)`.
pub(crate) fn solve(alpha: &[f64], beta: &[f64], rhs: &Vector) -> Result<Vector> {
    let l = alpha.len();
    if l == 0 {
        return Ok(Vector::zeros(0));
    }
    let pivots = ldlt_pivots(alpha, beta, 0.0).ok_or(Error::SingularTridiagonal)?;
    let scale = alpha.iter().chain(beta.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if pivots.iter().any(|d| d.abs() <= 1e-300_f64.max(f64::EPSILON * 1e-6 * scale)) {
        return Err(Error::SingularTridiagonal);
    }
    // Forward: L y = rhs, with L unit lower bidiagonal, L[j, j-1] = beta[j-1] / d[j-1].
    let mut y = rhs.clone();
    for j in 1..l {
        let lj = beta[j - 1] / pivots[j - 1];
        y[j] -= lj * y[j - 1];
    }
    for j in 0..l {
        y[j] /= pivots[j];
    }
    for j in (0..l - 1).rev() {
        let lj = beta[j] / pivots[j];
        y[j] -= lj * y[j + 1];
    }
    Ok(y)
}

pub(crate) fn matvec(alpha: &[f64], beta: &[f64], x: &Vector) -> Vector {
    let l = alpha.len();
    Vector::from_fn(l, |i, _| {
        let mut s = alpha[i] * x[i];
        if i > 0 {
            s += beta[i - 1] * x[i - 1];
        }
        if i + 1 < l {
            s += beta[i] * x[i + 1];
        }
        s
    })
}

pub(crate) fn to_dense(alpha: &[f64], beta: &[f64]) -> Matrix {
    let l = alpha.len();
    let mut t = Matrix::zeros(l, l);
    for i in 0..l {
        t[(i, i)] = alpha[i];
        if i + 1 < l {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

/// Number of eigenvalues strictly below `x` (Sturm count).
fn count_below(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for (j, &a) in alpha.iter().enumerate() {
        let b2 = if j == 0 { 0.0 } else { beta[j - 1] * beta[j - 1] };
        d = a - x - if j == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = -f64::EPSILON * (a.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

pub(crate) fn min_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    if alpha.is_empty() {
        return f64::INFINITY;
    }
    eigenvalue(alpha, beta, 1)
}

pub(crate) fn max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    if alpha.is_empty() {
        return f64::NEG_INFINITY;
    }
    eigenvalue(alpha, beta, alpha.len())
}

/// `k`-th smallest eigenvalue (1-based) by bisection on the Gershgorin interval.
fn eigenvalue(alpha: &[f64], beta: &[f64], k: usize) -> f64 {
    let l = alpha.len();
    let radius = |i: usize| {
        let mut r = 0.0;
        if i > 0 {
            r += beta[i - 1].abs();
        }
        if i + 1 < l {
            r += beta[i].abs();
        }
        r
    };
    let mut lo = (0..l).map(|i| alpha[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..l).map(|i| alpha[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    let tol = f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        if hi - lo <= 2.0 * tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_below(alpha, beta, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
