//! Lawson-Hanson active set method, extended to two-sided bounds.
//!
//! Coordinates outside the passive set `P` are held fixed (at a bound, or at
//! their starting value until they first enter `P`). One outer iteration
//! moves the most violating fixed coordinate into `P`, solves the
//! unconstrained least-squares problem on `P` through the normal equations,
//! and backs off towards the previous point whenever that solution leaves
//! the box, releasing the coordinates that hit a bound.

use nalgebra::{DMatrix, DVector};

use crate::duality::factor_spd;
use crate::error::{Error, Result};
use crate::linalg;
use crate::screening::ScreeningState;

use super::{Iterate, UpdateStatus};

#[derive(Debug, Clone)]
pub struct ActiveSetState {
    free: Vec<bool>,
    passive: Vec<usize>,
    dirty: bool,
    outer_iterations: usize,
}

enum Entry {
    Accepted,
    Rejected,
}

impl ActiveSetState {
    pub fn new(n: usize) -> Self {
        Self {
            free: vec![false; n],
            passive: Vec::new(),
            dirty: false,
            outer_iterations: 0,
        }
    }

    /// Global indices of the passive (free) coordinates.
    pub fn passive(&self) -> &[usize] {
        &self.passive
    }

    pub fn outer_iterations(&self) -> usize {
        self.outer_iterations
    }

    /// The passive coordinates no longer solve their least-squares subproblem.
    pub fn mark_dirty(&mut self) {
        self.dirty = true;
    }

    fn sync(&mut self, st: &ScreeningState) {
        let before = self.passive.len();
        let free = &mut self.free;
        self.passive.retain(|&j| {
            let keep = st.contains(j);
            if !keep {
                free[j] = false;
            }
            keep
        });
        if self.passive.len() != before {
            self.dirty = true;
        }
    }

    fn release(&mut self, j: usize) {
        self.free[j] = false;
        self.passive.retain(|&i| i != j);
    }
}

/// One outer iteration. Returns `Stationary` once no fixed coordinate can
/// lower the objective.
pub fn active_set_update(st: &ScreeningState, it: &mut Iterate, state: &mut ActiveSetState) -> Result<UpdateStatus> {
    state.sync(st);
    state.outer_iterations += 1;
    if state.dirty {
        solve_passive(st, it, state, None)?;
        state.dirty = false;
        it.invalidate();
        return Ok(UpdateStatus::Progress);
    }

    it.gradient(st);
    let grad = &it.grad;
    let mut candidates: Vec<(f64, usize, f64)> = Vec::new();
    for (k, &g) in grad.iter().enumerate() {
        let j = st.preserved()[k];
        if state.free[j] {
            continue;
        }
        let w = -g;
        let x = it.x[j];
        if w > 0.0 && x < st.upper(k) {
            candidates.push((w, j, 1.0));
        } else if w < 0.0 && x > st.lower(k) {
            candidates.push((-w, j, -1.0));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    for &(_, j, direction) in &candidates {
        state.free[j] = true;
        state.passive.push(j);
        match solve_passive(st, it, state, Some((j, direction)))? {
            Entry::Accepted => {
                it.invalidate();
                return Ok(UpdateStatus::Progress);
            }
            Entry::Rejected => continue,
        }
    }
    Ok(UpdateStatus::Stationary)
}

fn solve_passive(
    st: &ScreeningState,
    it: &mut Iterate,
    state: &mut ActiveSetState,
    mut entering: Option<(usize, f64)>,
) -> Result<Entry> {
    loop {
        let q = state.passive.len();
        if q == 0 {
            return Ok(Entry::Accepted);
        }
        let pos: Vec<usize> = state
            .passive
            .iter()
            .map(|&j| st.position_of(j).expect("passive coordinate is preserved"))
            .collect();
        let xp: Vec<f64> = state.passive.iter().map(|&j| it.x[j]).collect();

        let mut gram = DMatrix::zeros(q, q);
        for a in 0..q {
            for b in 0..=a {
                let g = linalg::dot(st.col(pos[a]), st.col(pos[b]));
                gram[(a, b)] = g;
                gram[(b, a)] = g;
            }
        }
        // normal equations for the passive block with the rest held fixed:
        // G s = A_P^T (y - z - A_F x_F) = G x_P - A_P^T r
        let rhs = DVector::from_fn(q, |a, _| {
            let gx: f64 = (0..q).map(|b| gram[(a, b)] * xp[b]).sum();
            gx - linalg::dot(st.col(pos[a]), it.resid.as_slice())
        });
        let chol = match factor_spd(gram) {
            Some(c) => c,
            None => {
                if let Some((j, _)) = entering {
                    state.release(j);
                    return Ok(Entry::Rejected);
                }
                return Err(Error::SingularSubproblem(q));
            }
        };
        let s = chol.solve(&rhs);

        if let Some((j, direction)) = entering.take() {
            // the entering coordinate sits last
            if (s[q - 1] - xp[q - 1]) * direction <= 0.0 {
                state.release(j);
                return Ok(Entry::Rejected);
            }
        }

        let mut alpha = 1.0_f64;
        let mut blocking = None;
        let mut violated = vec![false; q];
        for a in 0..q {
            let k = pos[a];
            let (lo, hi) = (st.lower(k), st.upper(k));
            let ratio = if s[a] <= lo {
                let d = xp[a] - s[a];
                if d > 0.0 {
                    (xp[a] - lo) / d
                } else {
                    0.0
                }
            } else if s[a] >= hi {
                let d = s[a] - xp[a];
                if d > 0.0 {
                    (hi - xp[a]) / d
                } else {
                    0.0
                }
            } else {
                continue;
            };
            violated[a] = true;
            if ratio < alpha || blocking.is_none() {
                alpha = alpha.min(ratio.max(0.0));
                if ratio <= alpha {
                    blocking = Some(a);
                }
            }
        }

        if blocking.is_none() {
            for a in 0..q {
                it.set_coordinate(st, pos[a], state.passive[a], s[a]);
            }
            return Ok(Entry::Accepted);
        }

        let mut leaving = Vec::new();
        for a in 0..q {
            let k = pos[a];
            let (lo, hi) = (st.lower(k), st.upper(k));
            let mut value = st.clip(k, xp[a] + alpha * (s[a] - xp[a]));
            if violated[a] {
                let bound = if s[a] <= lo { lo } else { hi };
                let snap = 1e-13 * (1.0 + bound.abs());
                if Some(a) == blocking || (value - bound).abs() <= snap {
                    value = bound;
                    leaving.push(state.passive[a]);
                }
            }
            it.set_coordinate(st, k, state.passive[a], value);
        }
        for j in leaving {
            state.release(j);
        }
    }
}
