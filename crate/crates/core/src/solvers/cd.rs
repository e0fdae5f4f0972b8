use crate::linalg;
use crate::model::Problem;
use crate::screening::ScreeningState;

use super::{Iterate, UpdateStatus};

/// Sweeps between two full recomputations of the residual and the gradient.
const REFRESH_EVERY: usize = 1000;

/// Sequential coordinate-wise state: the Gram matrix `H = A^T A` and the
/// gradient `mu = A^T (A x - y)`, kept current after every coordinate move.
///
/// A coordinate move costs `O(|A|)` for the gradient and `O(1)` for the
/// objective, which is tracked exactly as
/// `f(x + d e_j) = f(x) + d mu_j + d^2 H_jj / 2`. The residual is not
/// touched inside the loop. The sphere test reads `A_A^T theta` from `mu`.
///
/// `H` and `mu` are stored over a window of columns containing the preserved
/// set, so that a move is one contiguous axpy. The window is cut down to the
/// preserved set once that has shrunk below 80% of it.
#[derive(Debug, Clone)]
pub struct CdState {
    n: usize,
    gram: Vec<f64>,
    /// Global indices of the window, in preserved order.
    window: Vec<usize>,
    /// `H` restricted to the window, column-major.
    hw: Vec<f64>,
    /// Gradient over the window.
    mu: Vec<f64>,
    /// Window slot of each global index, `usize::MAX` outside.
    slot_of: Vec<usize>,
    /// Window slot of each preserved position.
    slot: Vec<usize>,
    /// Value of each coordinate as last folded into `mu`.
    applied: Vec<f64>,
    seen_lower: usize,
    seen_upper: usize,
}

impl CdState {
    /// Builds the Gram matrix and switches `it` to a tracked objective.
    pub fn new(p: &Problem, st: &ScreeningState, it: &mut Iterate) -> Self {
        let n = p.n();
        let gram = linalg::gram(p.m(), p.a().as_slice());
        let mut state = Self {
            n,
            gram,
            window: Vec::new(),
            hw: Vec::new(),
            mu: Vec::new(),
            slot_of: vec![usize::MAX; n],
            slot: Vec::new(),
            applied: it.x.iter().copied().collect(),
            seen_lower: st.sat_lower().len(),
            seen_upper: st.sat_upper().len(),
        };
        state.rebuild_window(st, &[]);
        state.recompute(p, st, it);
        state
    }

    /// Restricts the window to the preserved set; `mu` entries are carried over.
    fn rebuild_window(&mut self, st: &ScreeningState, old_mu: &[f64]) {
        let window = st.preserved().to_vec();
        let w = window.len();
        let mut hw = Vec::with_capacity(w * w);
        for &j in &window {
            let h = &self.gram[j * self.n..(j + 1) * self.n];
            hw.extend(window.iter().map(|&i| h[i]));
        }
        let mu = window
            .iter()
            .map(|&j| old_mu.get(self.slot_of[j]).copied().unwrap_or(0.0))
            .collect();
        for &j in &self.window {
            self.slot_of[j] = usize::MAX;
        }
        for (s, &j) in window.iter().enumerate() {
            self.slot_of[j] = s;
        }
        self.window = window;
        self.hw = hw;
        self.mu = mu;
        self.slot = (0..w).collect();
    }

    /// Residual, gradient and objective from scratch.
    fn recompute(&mut self, p: &Problem, st: &ScreeningState, it: &mut Iterate) {
        it.tracked_objective = None;
        it.refresh(p, st);
        for k in 0..st.len() {
            self.mu[self.slot[k]] = linalg::dot(st.col(k), it.resid.as_slice());
        }
        it.tracked_objective = Some(it.objective());
    }

    #[inline]
    fn fold(&mut self, s: usize, delta: f64) {
        let w = self.window.len();
        linalg::axpy(delta, &self.hw[s * w..(s + 1) * w], &mut self.mu);
    }

    /// Folds coordinates moved by screening since the last call into `mu`
    /// and the tracked objective, then realigns the window.
    fn sync(&mut self, st: &ScreeningState, it: &mut Iterate) {
        if st.len() == self.slot.len() {
            return;
        }
        let lower = &st.sat_lower()[self.seen_lower..];
        let upper = &st.sat_upper()[self.seen_upper..];
        let moved: Vec<(usize, f64)> = lower
            .iter()
            .chain(upper)
            .map(|&j| (self.slot_of[j], it.x[j] - self.applied[j]))
            .filter(|&(_, d)| d != 0.0)
            .collect();
        for &j in lower.iter().chain(upper) {
            self.applied[j] = it.x[j];
        }
        self.seen_lower = st.sat_lower().len();
        self.seen_upper = st.sat_upper().len();

        // the window still holds every moved coordinate with a current mu
        let w = self.window.len();
        let mut df = 0.0;
        for &(a, da) in &moved {
            df += da * self.mu[a];
            for &(b, db) in &moved {
                df += 0.5 * da * db * self.hw[a * w + b];
            }
        }
        if let Some(f) = it.tracked_objective.as_mut() {
            *f += df;
        }
        for (s, d) in moved {
            self.fold(s, d);
        }

        if 5 * st.len() < 4 * w {
            let old_mu = std::mem::take(&mut self.mu);
            self.rebuild_window(st, &old_mu);
        } else {
            self.slot = st.preserved().iter().map(|&j| self.slot_of[j]).collect();
        }
    }
}

/// `inner_passes` cyclic coordinate sweeps over the preserved set, in compact order.
///
/// Each coordinate is minimized exactly, `x_j <- clip(x_j - mu_j / ||a_j||^2)`.
/// Leaves `A_A^T r` cached in the iterate; `it.resid` is left stale.
pub fn cd_update(
    p: &Problem,
    st: &ScreeningState,
    it: &mut Iterate,
    cd: &mut CdState,
    inner_passes: usize,
) -> UpdateStatus {
    cd.sync(st, it);
    let mut moved = false;
    let mut f = it.objective();
    for _ in 0..inner_passes {
        for k in 0..st.len() {
            let s = cd.slot[k];
            let g = cd.mu[s];
            if g == 0.0 {
                continue;
            }
            let j = st.preserved()[k];
            let h = st.sq_norm(k);
            let target = st.clip(k, it.x[j] - g / h);
            let delta = target - it.x[j];
            if delta != 0.0 {
                moved = true;
                f += delta * (g + 0.5 * delta * h);
                it.x[j] = target;
                cd.fold(s, delta);
                cd.applied[j] = target;
            }
        }
        it.tracked_objective = Some(f);
        it.sweeps += 1;
        if it.sweeps.is_multiple_of(REFRESH_EVERY) {
            cd.recompute(p, st, it);
            f = it.objective();
        }
    }
    let grad: Vec<f64> = cd.slot.iter().map(|&s| cd.mu[s]).collect();
    it.set_gradient(grad);
    if moved {
        UpdateStatus::Progress
    } else {
        UpdateStatus::Stationary
    }
}
