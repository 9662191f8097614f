//! Active-set estimates and the partitioned Hessian approximation
//!
//! ```text
//! H = [Pᵀ Rᵀ] diag(F, ν I) [P; R]
//! ```
//!
//! where `P`/`R` select the inactive/active coordinates, `F` is a Lanczos
//! approximation of the inactive block of the Hessian and `ν` scales a
//! gradient step on the active block. Because `H` is block diagonal, the
//! projection splits into a clamp on the active block and an interior point
//! projection on the inactive one.

use crate::bounds::BoxBounds;
use crate::error::{Error, Result};
use crate::ipm::{self, IpmConfig, IpmReport};
use crate::lanczos::{lanczos_tridiag, KrylovFactorization, LanczosOptions, ShiftedMetric};
use crate::operators::HessianOperator;
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActiveSetMode {
    #[default]
    None,
    Boundary,
    Augmented,
}

impl ActiveSetMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActiveSetMode::None => "none",
            ActiveSetMode::Boundary => "boundary",
            ActiveSetMode::Augmented => "augmented",
        }
    }
}

impl std::str::FromStr for ActiveSetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ActiveSetMode::None),
            "boundary" => Ok(ActiveSetMode::Boundary),
            "augmented" => Ok(ActiveSetMode::Augmented),
            other => Err(Error::InvalidParameter(format!("unknown active-set mode '{other}'"))),
        }
    }
}

/// Sorted, disjoint active and inactive index sets covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    active: Vec<usize>,
    inactive: Vec<usize>,
    epsilon_bits: u64,
}

impl Partition {
    fn from_mask(mask: impl Iterator<Item = bool>, epsilon: f64) -> Self {
        let mut active = Vec::new();
        let mut inactive = Vec::new();
        for (i, is_active) in mask.enumerate() {
            if is_active {
                active.push(i);
            } else {
                inactive.push(i);
            }
        }
        Self {
            active,
            inactive,
            epsilon_bits: epsilon.to_bits(),
        }
    }

    pub fn all_inactive(n: usize) -> Self {
        Self::from_mask(std::iter::repeat_n(false, n), 0.0)
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn inactive(&self) -> &[usize] {
        &self.inactive
    }

    pub fn epsilon(&self) -> f64 {
        f64::from_bits(self.epsilon_bits)
    }

    pub fn dim(&self) -> usize {
        self.active.len() + self.inactive.len()
    }

    /// `|A| / n`.
    pub fn active_fraction(&self) -> f64 {
        if self.dim() == 0 {
            0.0
        } else {
            self.active.len() as f64 / self.dim() as f64
        }
    }

    pub fn select(mode: ActiveSetMode, x: &Vector, grad: &Vector, bounds: &BoxBounds, eps: f64) -> Self {
        match mode {
            ActiveSetMode::None => Self::all_inactive(x.len()),
            ActiveSetMode::Boundary => boundary_index(x, bounds, eps),
            ActiveSetMode::Augmented => augmented_index(x, grad, bounds, eps),
        }
    }
}

/// `{ i : x_i ≤ l_i + ε or x_i ≥ u_i − ε }`; infinite bounds never trigger.
pub fn boundary_index(x: &Vector, bounds: &BoxBounds, eps: f64) -> Partition {
    let (l, u) = (bounds.lower(), bounds.upper());
    Partition::from_mask((0..x.len()).map(|i| near_lower(x[i], l[i], eps) || near_upper(x[i], u[i], eps)), eps)
}

/// `{ i : (x_i ≤ l_i + ε and ∂_i f > 0) or (x_i ≥ u_i − ε and ∂_i f < 0) }`.
pub fn augmented_index(x: &Vector, grad: &Vector, bounds: &BoxBounds, eps: f64) -> Partition {
    let (l, u) = (bounds.lower(), bounds.upper());
    Partition::from_mask(
        (0..x.len()).map(|i| (near_lower(x[i], l[i], eps) && grad[i] > 0.0) || (near_upper(x[i], u[i], eps) && grad[i] < 0.0)),
        eps,
    )
}

fn near_lower(x: f64, l: f64, eps: f64) -> bool {
    l.is_finite() && x <= l + eps
}

fn near_upper(x: f64, u: f64, eps: f64) -> bool {
    u.is_finite() && x >= u - eps
}

/// `P G Pᵀ` realized by embedding into and extracting from the full space.
pub struct MaskedOperator<'a> {
    inner: &'a dyn HessianOperator,
    indices: &'a [usize],
}

impl<'a> MaskedOperator<'a> {
    pub fn new(inner: &'a dyn HessianOperator, indices: &'a [usize]) -> Self {
        Self { inner, indices }
    }
}

impl HessianOperator for MaskedOperator<'_> {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn apply(&self, v: &Vector) -> Vector {
        let mut full = Vector::zeros(self.inner.dim());
        for (&i, &vi) in self.indices.iter().zip(v.iter()) {
            full[i] = vi;
        }
        let out = self.inner.apply(&full);
        Vector::from_iterator(self.indices.len(), self.indices.iter().map(|&i| out[i]))
    }
}

fn gather(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

fn scatter(dst: &mut Vector, idx: &[usize], src: &Vector) {
    for (&i, &s) in idx.iter().zip(src.iter()) {
        dst[i] = s;
    }
}

/// Block-diagonal metric: shifted Lanczos metric on the inactive block, `ν I` on the active block.
#[derive(Debug, Clone)]
pub struct PartitionedMetric {
    partition: Partition,
    inactive: ShiftedMetric,
    nu: f64,
}

impl PartitionedMetric {
    pub fn new(partition: Partition, inactive: ShiftedMetric, nu: f64) -> Result<Self> {
        if inactive.dim() != partition.inactive().len() {
            return Err(Error::DimensionMismatch {
                expected: partition.inactive().len(),
                got: inactive.dim(),
            });
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
        }
        Ok(Self { partition, inactive, nu })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn inactive_metric(&self) -> &ShiftedMetric {
        &self.inactive
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let mut out = v * self.nu;
        let inactive = self.partition.inactive();
        if !inactive.is_empty() {
            scatter(&mut out, inactive, &self.inactive.apply(&gather(v, inactive)));
        }
        out
    }

    pub fn quadratic_form(&self, v: &Vector) -> f64 {
        v.dot(&self.apply(v))
    }
}

/// Search step `H⁻¹ ∇f` (the solver moves along its negative) and the metric used to project.
#[derive(Debug, Clone)]
pub struct PartitionedStep {
    pub step: Vector,
    pub metric: PartitionedMetric,
    pub factorization: KrylovFactorization,
}

/// Inactive-step size, relative to the active gradient, below which ν falls back to 1.
pub const NU_DEGENERATE: f64 = 1e-8;

/// Builds `F` by Lanczos on the masked Hessian seeded with `−P∇f`, then
/// `ν = ‖R∇f‖∞ / ‖F⁻¹P∇f‖∞` (1 when either norm vanishes), capped at the
/// largest Ritz value of `F`.
pub fn partitioned_direction(
    hessian: &dyn HessianOperator,
    grad: &Vector,
    partition: Partition,
    lanczos: &LanczosOptions,
    shift: f64,
) -> Result<PartitionedStep> {
    let n = hessian.dim();
    if grad.len() != n || partition.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if grad.len() != n { grad.len() } else { partition.dim() },
        });
    }
    let inactive = partition.inactive().to_vec();
    let active = partition.active().to_vec();
    let g_inactive = gather(grad, &inactive);

    let factorization = if inactive.is_empty() || g_inactive.amax() == 0.0 {
        KrylovFactorization::empty(inactive.len())
    } else {
        let masked = MaskedOperator::new(hessian, &inactive);
        lanczos_tridiag(&masked, &(-&g_inactive), lanczos)?
    };
    let inactive_step = factorization.apply_pseudoinverse(&g_inactive)?;

    let g_active = gather(grad, &active);
    let numerator = if active.is_empty() { 0.0 } else { g_active.amax() };
    let denominator = if inactive_step.is_empty() { 0.0 } else { inactive_step.amax() };
    // A rounding-level inactive step would shrink the active step to nothing.
    let nu = if numerator > 0.0 && denominator > NU_DEGENERATE * numerator && (numerator / denominator).is_finite() {
        numerator / denominator
    } else {
        1.0
    };
    // Near a solution the Newton step vanishes faster than the active
    // gradient; without a cap, ε-active points never reach their bound.
    let nu = if factorization.rank() > 0 { nu.min(factorization.max_ritz_value().max(shift)) } else { nu };

    let mut step = Vector::zeros(n);
    scatter(&mut step, &inactive, &inactive_step);
    scatter(&mut step, &active, &(g_active / nu));
    let metric = PartitionedMetric::new(partition, ShiftedMetric::new(factorization.clone(), shift)?, nu)?;
    Ok(PartitionedStep {
        step,
        metric,
        factorization,
    })
}

/// Clamp on the active block, interior point projection on the inactive block.
pub fn partitioned_project(
    metric: &PartitionedMetric,
    y: &Vector,
    bounds: &BoxBounds,
    cfg: &IpmConfig,
    start: Option<&Vector>,
) -> Result<(Vector, IpmReport)> {
    let n = metric.dim();
    if y.len() != n || bounds.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if y.len() != n { y.len() } else { bounds.dim() },
        });
    }
    let mut z = bounds.clamp(y);
    let inactive = metric.partition().inactive();
    if inactive.is_empty() {
        return Ok((
            z,
            IpmReport {
                converged: true,
                ..Default::default()
            },
        ));
    }
    let local_start = start.map(|s| gather(s, inactive));
    let (zi, report) = ipm::project_from(
        metric.inactive_metric(),
        &gather(y, inactive),
        &bounds.select(inactive),
        cfg,
        local_start.as_ref(),
    )?;
    scatter(&mut z, inactive, &zi);
    Ok((z, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::DenseOperator;
    use crate::Matrix;

    fn fig1_bounds() -> BoxBounds {
        BoxBounds::new(Vector::from_vec(vec![-5.0, 3.0]), Vector::from_vec(vec![0.0, 8.0])).unwrap()
    }

    #[test]
    fn boundary_index_examples() {
        let p = boundary_index(&Vector::from_vec(vec![-4.9, 3.0]), &fig1_bounds(), 0.2);
        assert_eq!(p.active(), &[0, 1]);
        let p = boundary_index(&Vector::from_vec(vec![-2.0, 5.0]), &fig1_bounds(), 0.0);
        assert!(p.active().is_empty());
        let p = boundary_index(&Vector::from_vec(vec![1e9, -1e9]), &BoxBounds::unbounded(2), 1.0);
        assert!(p.active().is_empty());
    }

    #[test]
    fn augmented_index_examples() {
        let b = BoxBounds::uniform(1, 0.0, 1.0).unwrap();
        let x = Vector::from_vec(vec![0.0]);
        assert_eq!(augmented_index(&x, &Vector::from_vec(vec![1.0]), &b, 1e-3).active(), &[0]);
        assert!(augmented_index(&x, &Vector::from_vec(vec![-1.0]), &b, 1e-3).active().is_empty());
        let b3 = BoxBounds::uniform(3, 0.0, 1.0).unwrap();
        let p = augmented_index(&Vector::from_vec(vec![0.0, 1.0, 0.5]), &Vector::zeros(3), &b3, 1e-3);
        assert!(p.active().is_empty());
        assert_eq!(p.inactive(), &[0, 1, 2]);
    }

    #[test]
    fn empty_active_set_reduces_to_plain_pseudoinverse() {
        let op = DenseOperator::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0])).unwrap();
        let g = Vector::from_vec(vec![5.0, 12.0]);
        let opts = LanczosOptions { max_rank: 2, ..Default::default() };
        let ps = partitioned_direction(&op, &g, Partition::all_inactive(2), &opts, 1e-3).unwrap();
        let direct = lanczos_tridiag(&op, &(-&g), &opts).unwrap().apply_pseudoinverse(&g).unwrap();
        assert!((ps.step - direct).amax() < 1e-14);
        assert_eq!(ps.metric.nu(), 1.0);
    }

    #[test]
    fn fig1_mixed_partition_step() {
        // x = [−4.9, 5]: coordinate 0 is within ε of its lower bound, coordinate 1 is free.
        let op = DenseOperator::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0])).unwrap();
        let x = Vector::from_vec(vec![-4.9, 5.0]);
        let g = op.apply(&x) + Vector::from_vec(vec![1.0, 1.0]);
        let part = boundary_index(&x, &fig1_bounds(), 0.2);
        assert_eq!(part.active(), &[0]);
        let ps = partitioned_direction(&op, &g, part, &LanczosOptions::default(), 1e-3).unwrap();
        // Inactive Newton step on the 1×1 block H22 = 2; ν = |g0| / |g1 / 2|.
        let inactive_step = g[1] / 2.0;
        let nu = g[0].abs() / inactive_step.abs();
        assert!((ps.step[1] - inactive_step).abs() < 1e-14);
        assert!((ps.metric.nu() - nu).abs() < 1e-14);
        assert!((ps.step[0] - g[0] / nu).abs() < 1e-14);
    }

    #[test]
    fn nu_is_capped_and_falls_back_when_degenerate() {
        let op = DenseOperator::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0])).unwrap();
        let part = || boundary_index(&Vector::from_vec(vec![-4.95, 5.0]), &fig1_bounds(), 0.1);
        let opts = LanczosOptions::default();
        // Ratio 100 / 0.005 exceeds the only Ritz value, H22 = 2.
        let ps = partitioned_direction(&op, &Vector::from_vec(vec![100.0, 0.01]), part(), &opts, 1e-3).unwrap();
        assert!((ps.metric.nu() - 2.0).abs() < 1e-12);
        assert!((ps.step[0] - 50.0).abs() < 1e-10);
        let ps = partitioned_direction(&op, &Vector::from_vec(vec![1.0, 1e-12]), part(), &opts, 1e-3).unwrap();
        assert_eq!(ps.metric.nu(), 1.0);
    }

    #[test]
    fn all_active_projection_is_clamp() {
        let part = Partition::from_mask([true, true].into_iter(), 0.1);
        let metric = PartitionedMetric::new(part, ShiftedMetric::scaled_identity(0, 1e-3).unwrap(), 2.0).unwrap();
        let y = Vector::from_vec(vec![-7.0, 10.0]);
        let (z, _) = partitioned_project(&metric, &y, &fig1_bounds(), &IpmConfig::default(), None).unwrap();
        assert_eq!(z, fig1_bounds().clamp(&y));
    }
}
