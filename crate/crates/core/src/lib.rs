//! Projected Newton-Krylov minimization under box constraints.
//!
//! Each outer iteration builds a rank-`l` Lanczos approximation `V T Vᵀ` of the
//! (approximate) Hessian, steps along `-V T⁻¹ Vᵀ ∇f`, and projects every
//! line-search trial back onto the box in the metric `V (T - cI) Vᵀ + cI`.
//! The projection is a small convex QP solved by a primal-dual interior point
//! method whose linear algebra costs `O(n l²)` per iteration.
//!
//! Modules, bottom up:
//!
//! * [`bounds`] and [`operators`]: boxes, matrix-free Hessian operators, the
//!   objective trait and a finite-difference gradient checker.
//! * [`lanczos`]: tridiagonalization, pseudoinverse and shifted metric.
//! * [`ipm`]: the interior point projection with a Woodbury-based step.
//! * [`active_set`]: boundary/augmented active-set estimates and the
//!   partitioned metric.
//! * [`solver`]: the outer loop plus projected-gradient and two-metric
//!   baselines.
//! * [`problems`], [`config`], [`cli`]: benchmark problems and the command
//!   line driver.

// `!(a < b)` is deliberate: it treats NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod active_set;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod error;
pub mod history;
pub mod ipm;
pub mod lanczos;
pub mod operators;
pub mod problems;
pub mod solver;
mod tridiagonal;

pub use active_set::{ActiveSetMode, Partition, PartitionedMetric};
pub use bounds::BoxBounds;
pub use error::{Error, Result};
pub use history::{ConvergenceHistory, IterationRecord, Violation};
pub use ipm::{IpmConfig, IpmReport, IpmState};
pub use lanczos::{KrylovFactorization, LanczosOptions, ShiftedMetric};
pub use operators::{HessianOperator, ObjectiveProblem};
pub use solver::{Method, SolverConfig, SolverResult, Status};

/// Dense column vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Dense column-major matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
