//! Zeroth-order constrained min-max optimization.
//!
//! The crate solves `min_{x in X} max_{y in Y} f(x, y)` when `f` can only be
//! queried for values, using randomized gradient estimates inside an
//! alternating projected descent-ascent loop. It also ships the benchmark
//! problems and the experiment harness used to study the method.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod harness;
pub mod oracle;
pub mod problems;
pub mod projections;
pub mod rng;
pub mod solvers;
pub mod vector;

pub use error::{Error, Result};
pub use estimators::{
    finite_diff_reference, smoothed_value_mc, variance_bound, zo_gradient, zo_gradient_with, EstimatorConfig,
    SmoothedEstimate, VarianceBoundParams,
};
pub use oracle::{FnOracle, FnSide, QueryLedger, SideFunction, StochasticOracle, XSide, YSide};
pub use projections::{project, project_box, project_l2_ball, project_simplex, simplex_root, ConstraintSet};
pub use rng::{draw_minibatch, draw_unit_ball, draw_unit_sphere, RngStream};
pub use solvers::{
    fo_min_max, stationary_gap, theory_rates, zo_finite_sum, zo_min_max, zo_pgd_reduced, MinMaxProblem, SolveError,
    SolverConfig, SolverTrace, TheoryRates, TraceRecord, YMode,
};
pub use vector::DecisionVector;
