use crate::error::{Error, Result};
use crate::screening::ScreeningState;

use super::{Iterate, UpdateStatus};

/// `0.99 alpha / (sigma / 0.999)^2`, where `sigma` is a power-iteration
/// estimate of `||A||_2` known to be within a factor `0.999` of the truth.
pub fn pg_step_size(sigma_estimate: f64, alpha: f64) -> f64 {
    let upper = sigma_estimate / 0.999;
    0.99 * alpha / (upper * upper)
}

/// `inner_passes` projected gradient steps on the preserved coordinates.
///
/// Leaves `A_A^T residual` at the new point cached in the iterate.
pub fn pg_update(st: &ScreeningState, it: &mut Iterate, step: f64, inner_passes: usize) -> Result<UpdateStatus> {
    let mut moved = false;
    for _ in 0..inner_passes {
        let before = it.objective();
        it.gradient(st);
        let grad = std::mem::take(&mut it.grad);
        for (k, &g) in grad.iter().enumerate() {
            let j = st.preserved()[k];
            let target = st.clip(k, it.x[j] - step * g);
            if target != it.x[j] {
                moved = true;
                it.set_coordinate(st, k, j, target);
            }
        }
        it.grad = grad;
        it.invalidate();
        let after = it.objective();
        if after > before + 1e-9 * before.max(1.0) {
            return Err(Error::StepSizeTooLarge { before, after });
        }
        it.gradient(st);
    }
    Ok(if moved {
        UpdateStatus::Progress
    } else {
        UpdateStatus::Stationary
    })
}
