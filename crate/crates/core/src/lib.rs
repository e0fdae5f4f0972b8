//! Gap safe screening for box-constrained least squares.
//!
//! Solves `min (1/2) ||A x - y||^2` subject to `l <= x <= u` (with `u_j = +inf`
//! allowed) by projected gradient, coordinate descent or an active set
//! method, and removes coordinates proven to sit at a bound while the solver
//! runs.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod duality;
pub mod error;
pub mod harness;
mod linalg;
pub mod model;
pub mod screening;
pub mod solvers;

pub use driver::{solve, write_trace_csv, Screening, SolveResult, TraceRecord};
pub use duality::{
    dual_point, dual_point_bvlr, dual_point_nnlr, dual_translate, duality_gap, eval_dual, select_translation_vector,
    DualState, TranslationStrategy, TranslationVector,
};
pub use error::{Error, Result};
pub use model::{eval_primal, PrimalPoint, Problem, QuadraticLoss};
pub use screening::{gap_safe_radius, ScreeningState};
pub use solvers::{SolverConfig, SolverKind, StepSize};
