//! Primal updaters working on the preserved columns `A_A` and the offset `z`.
//!
//! Each solver advances an [`Iterate`], which owns the full-length `x` and the
//! residual `A_A x_A + z - y`. Coordinate descent works from the Gram matrix
//! instead and lets the residual go stale; [`Iterate::sync_residual`] rebuilds
//! it. Screened coordinates are never read.

mod active_set;
mod cd;
mod pg;
mod spectral;

pub use active_set::{active_set_update, ActiveSetState};
pub use cd::{cd_update, CdState};
pub use pg::{pg_step_size, pg_update};
pub use spectral::{spectral_norm_estimate, spectral_norm_of_columns};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Problem;
use crate::screening::ScreeningState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    ProjectedGradient,
    CoordinateDescent,
    ActiveSet,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::ProjectedGradient => "pg",
            Self::CoordinateDescent => "cd",
            Self::ActiveSet => "active-set",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pg" | "projected-gradient" => Ok(Self::ProjectedGradient),
            "cd" | "coordinate-descent" => Ok(Self::CoordinateDescent),
            "active-set" | "as" => Ok(Self::ActiveSet),
            other => Err(Error::BadConfig(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSize {
    /// `0.99 alpha / L` with `L` from a power-iteration estimate of `||A||_2^2`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub step_size: StepSize,
    pub power_iters: usize,
    /// Primal passes between two screening rounds.
    pub inner_passes: usize,
    /// `None` picks `10^6` for PG/CD and `10 n` for the active set.
    pub max_rounds: Option<usize>,
    pub gap_tol: f64,
    /// Seed of the power-iteration start vector.
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            step_size: StepSize::Auto,
            power_iters: 50,
            inner_passes: 1,
            max_rounds: None,
            gap_tol: 1e-6,
            seed: 0,
        }
    }

    pub fn with_gap_tol(mut self, tol: f64) -> Self {
        self.gap_tol = tol;
        self
    }

    pub fn with_max_rounds(mut self, rounds: usize) -> Self {
        self.max_rounds = Some(rounds);
        self
    }

    pub fn with_inner_passes(mut self, passes: usize) -> Self {
        self.inner_passes = passes;
        self
    }

    pub fn with_step_size(mut self, step: StepSize) -> Self {
        self.step_size = step;
        self
    }

    pub fn max_rounds_for(&self, n: usize) -> usize {
        self.max_rounds.unwrap_or(match self.kind {
            SolverKind::ActiveSet => 10 * n,
            _ => 1_000_000,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) {
            return Err(Error::BadConfig(format!(
                "gap_tol must be positive, got {}",
                self.gap_tol
            )));
        }
        if self.inner_passes == 0 {
            return Err(Error::BadConfig("inner_passes must be at least 1".into()));
        }
        if let StepSize::Fixed(s) = self.step_size {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::BadConfig(format!("step size must be positive, got {s}")));
            }
        }
        if self.power_iters == 0 {
            return Err(Error::BadConfig("power_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateStatus {
    Progress,
    /// The solver cannot move from the current point.
    Stationary,
}

/// Primal iterate: full `x`, residual `A_A x_A + z - y` and a lazily
/// refreshed `A_A^T residual` aligned with the preserved set.
///
/// Coordinate descent works from the Gram matrix alone and tracks the
/// objective instead of the residual; the residual is then only current
/// after [`Iterate::sync_residual`].
#[derive(Debug, Clone)]
pub struct Iterate {
    pub x: DVector<f64>,
    pub resid: DVector<f64>,
    pub(crate) grad: Vec<f64>,
    grad_valid: bool,
    pub(crate) sweeps: usize,
    pub(crate) tracked_objective: Option<f64>,
}

impl Iterate {
    /// Starts from the box projection of the origin.
    pub fn new(p: &Problem, st: &ScreeningState) -> Self {
        Self::from_point(p, st, p.initial_point())
    }

    pub fn from_point(p: &Problem, st: &ScreeningState, x: DVector<f64>) -> Self {
        let resid = st.forward_from_full(&x) - p.y();
        Self {
            x,
            resid,
            grad: Vec::new(),
            grad_valid: false,
            sweeps: 0,
            tracked_objective: None,
        }
    }

    /// `(1/2) ||A x - y||^2`.
    pub fn objective(&self) -> f64 {
        self.tracked_objective
            .unwrap_or_else(|| 0.5 * self.resid.norm_squared())
    }

    /// Whether `resid` may lag behind `x`.
    pub fn residual_is_lazy(&self) -> bool {
        self.tracked_objective.is_some()
    }

    /// Brings a lazily kept residual up to date with `x`.
    pub fn sync_residual(&mut self, p: &Problem, st: &ScreeningState) {
        if self.residual_is_lazy() {
            self.resid = st.forward_from_full(&self.x) - p.y();
        }
    }

    /// Recompute the residual from scratch.
    pub fn refresh(&mut self, p: &Problem, st: &ScreeningState) {
        self.resid = st.forward_from_full(&self.x) - p.y();
        self.grad_valid = false;
    }

    pub fn invalidate(&mut self) {
        self.grad_valid = false;
    }

    pub fn has_gradient(&self) -> bool {
        self.grad_valid
    }

    /// `A_A^T (A_A x_A + z - y)` aligned with the preserved set.
    pub fn gradient(&mut self, st: &ScreeningState) -> &[f64] {
        if !self.grad_valid || self.grad.len() != st.len() {
            st.adjoint_into(self.resid.as_slice(), &mut self.grad);
            self.grad_valid = true;
        }
        &self.grad
    }

    /// Installs an externally maintained `A_A^T residual`.
    pub(crate) fn set_gradient(&mut self, grad: Vec<f64>) {
        self.grad = grad;
        self.grad_valid = true;
    }

    /// Sets coordinate `j` (compact position `k`) to `value` and updates the residual.
    #[inline]
    pub(crate) fn set_coordinate(&mut self, st: &ScreeningState, k: usize, j: usize, value: f64) {
        let delta = value - self.x[j];
        if delta != 0.0 {
            crate::linalg::axpy(delta, st.col(k), self.resid.as_mut_slice());
            self.x[j] = value;
        }
    }
}
