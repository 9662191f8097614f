//! Benchmark problems.

pub mod ct;
pub mod mlr;
pub mod quadratic;

pub use ct::{make_toy_ct, CtConfig, SpectralCtProblem};
pub use mlr::{make_synthetic_mlr, MlrConfig, MlrProblem};
pub use quadratic::{make_fig1_problem, random_convex_qp, QuadraticBoxProblem};
