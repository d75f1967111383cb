//! LASSO solving and sensitivity analysis of its solution map.
//!
//! The crate solves the unconstrained LASSO problem
//!
//! ```text
//! min_x  0.5 * ||Ax - b||^2 + lambda * ||x||_1
//! ```
//!
//! to duality-gap-certified accuracy, and analyzes how the optimal value
//! and the optimal solution respond to perturbations of the measurement
//! vector `b`, the tuning parameter `lambda`, and the matrix `A`:
//!
//! - verification of the weak / intermediate / strong assumption tiers that
//!   govern uniqueness and differentiability of the solution map,
//! - closed-form and enumerated directional derivatives of the solution,
//! - Lipschitz-modulus bounds in all three parameter modes,
//! - compressed-sensing experiments on random subgaussian ensembles that
//!   validate those bounds empirically (restricted-isometry checks,
//!   lambda sweeps, sparsity caps).

// `!(x > 0.0)`-style guards are kept as written: unlike `x <= 0.0`, they
// reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sensitivity;
pub mod simplex;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{IndexSet, Matrix};
pub use sensitivity::{AssumptionReport, SensitivityReport, Tolerances, WeakVerdict};
pub use solver::{LassoSolution, ProblemInstance};

// compile the README examples alongside the test suite
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
