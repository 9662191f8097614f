//! Box constraints `l ≤ x ≤ u` with possibly infinite entries.

use crate::error::{Error, Result};
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct BoxBounds {
    lower: Vector,
    upper: Vector,
}

impl BoxBounds {
    pub fn new(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (index, (&l, &u)) in lower.iter().zip(upper.iter()).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidBounds {
                    index,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Self {
            lower: Vector::from_element(n, f64::NEG_INFINITY),
            upper: Vector::from_element(n, f64::INFINITY),
        }
    }

    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(Vector::from_element(n, lower), Vector::from_element(n, upper))
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Vector {
        &self.lower
    }

    pub fn upper(&self) -> &Vector {
        &self.upper
    }

    /// Euclidean projection `max(min(y, u), l)`.
    pub fn clamp(&self, y: &Vector) -> Vector {
        let mut z = y.clone();
        self.clamp_in_place(&mut z);
        z
    }

    pub fn clamp_in_place(&self, z: &mut Vector) {
        for ((zi, &l), &u) in z.iter_mut().zip(self.lower.iter()).zip(self.upper.iter()) {
            *zi = zi.min(u).max(l);
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(&xi, (&l, &u))| l <= xi && xi <= u)
    }

    pub fn check_feasible(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for (index, &value) in x.iter().enumerate() {
            let (lower, upper) = (self.lower[index], self.upper[index]);
            if !(lower <= value && value <= upper) {
                return Err(Error::Infeasible {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn has_finite_bound(&self, i: usize) -> bool {
        self.lower[i].is_finite() || self.upper[i].is_finite()
    }

    /// Restriction of the box to the given coordinates.
    pub fn select(&self, indices: &[usize]) -> BoxBounds {
        BoxBounds {
            lower: Vector::from_iterator(indices.len(), indices.iter().map(|&i| self.lower[i])),
            upper: Vector::from_iterator(indices.len(), indices.iter().map(|&i| self.upper[i])),
        }
    }

    /// Active-set margin: `1e-3` times the narrowest finite width, floored at `1e-8`.
    pub fn default_epsilon(&self) -> f64 {
        let narrowest = self
            .lower
            .iter()
            .zip(self.upper.iter())
            .map(|(&l, &u)| u - l)
            .filter(|w| w.is_finite() && *w > 0.0)
            .fold(f64::INFINITY, f64::min);
        if narrowest.is_finite() {
            (1e-3 * narrowest).max(1e-8)
        } else {
            1e-8
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_crossed_bounds() {
        let err = BoxBounds::new(Vector::from_vec(vec![0.0, 2.0]), Vector::from_vec(vec![1.0, 1.0]));
        assert!(matches!(err, Err(Error::InvalidBounds { index: 1, .. })));
        assert!(BoxBounds::new(Vector::from_vec(vec![f64::INFINITY]), Vector::from_vec(vec![f64::INFINITY])).is_err());
    }

    #[test]
    fn clamp_matches_coordinatewise_formula() {
        let b = BoxBounds::new(
            Vector::from_vec(vec![-5.0, 3.0, f64::NEG_INFINITY]),
            Vector::from_vec(vec![0.0, 8.0, 1.0]),
        )
        .unwrap();
        let z = b.clamp(&Vector::from_vec(vec![-1.0, 0.0, -1e300]));
        assert_eq!(z.as_slice(), &[-1.0, 3.0, -1e300]);
        assert!(b.contains(&z));
        assert!(b.check_feasible(&Vector::from_vec(vec![1.0, 3.0, 0.0])).is_err());
    }

    #[test]
    fn epsilon_is_range_relative() {
        let b = BoxBounds::new(
            Vector::from_vec(vec![0.0, -1.0, f64::NEG_INFINITY]),
            Vector::from_vec(vec![0.1, 1.0, f64::INFINITY]),
        )
        .unwrap();
        assert!((b.default_epsilon() - 1e-4).abs() < 1e-18);
        assert_eq!(BoxBounds::unbounded(3).default_epsilon(), 1e-8);
    }
}
