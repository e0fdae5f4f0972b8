//! Gap safe sphere screening and preserved-set bookkeeping.
//!
//! The state keeps a compacted, column-major copy of `A` restricted to the
//! preserved set. Screened columns are squeezed out in one stable pass per
//! round, keeping the relative order that cyclic solvers rely on, so that forward and
//! adjoint products cost `O(m (|A| + 1))`; their fixed contribution
//! `A_{S} x_{S}` lives in `z`.
//!
//! For the quadratic loss one could fold `z` into `y` instead; the generic
//! offset is kept so every loss goes through the same path.

use nalgebra::DVector;

use crate::duality::TranslationVector;
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Problem;

const SCREENED: usize = usize::MAX;

/// `sqrt(2 gap / alpha)`.
pub fn gap_safe_radius(gap: f64, alpha: f64) -> Result<f64> {
    if !(gap >= 0.0) {
        return Err(Error::NegativeGap(gap));
    }
    if !(alpha > 0.0) {
        return Err(Error::BadConfig(format!("alpha must be positive, got {alpha}")));
    }
    Ok((2.0 * gap / alpha).sqrt())
}

#[derive(Debug, Clone)]
pub struct ScreeningState {
    m: usize,
    n: usize,
    preserved: Vec<usize>,
    position: Vec<usize>,
    cols: Vec<f64>,
    col_norms: Vec<f64>,
    sq_norms: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    upper_inf: Vec<bool>,
    a_t_t: Option<Vec<f64>>,
    sat_lower: Vec<usize>,
    sat_upper: Vec<usize>,
    z: Vec<f64>,
    radius: f64,
}

impl ScreeningState {
    /// Everything preserved, `z = 0`.
    pub fn new(p: &Problem) -> Self {
        let (m, n) = (p.m(), p.n());
        let col_norms = p.column_norms();
        let sq_norms = col_norms.iter().map(|c| c * c).collect();
        Self {
            m,
            n,
            preserved: (0..n).collect(),
            position: (0..n).collect(),
            cols: p.a().as_slice().to_vec(),
            col_norms,
            sq_norms,
            lower: p.lower().iter().copied().collect(),
            upper: p.upper().iter().copied().collect(),
            upper_inf: (0..n).map(|j| p.upper_is_inf(j)).collect(),
            a_t_t: None,
            sat_lower: Vec::new(),
            sat_upper: Vec::new(),
            z: vec![0.0; m],
            radius: f64::INFINITY,
        }
    }

    /// Attach `A^T t` so the translated dual point can be formed on the preserved set.
    pub fn with_translation(mut self, tv: &TranslationVector) -> Self {
        self.a_t_t = Some(self.preserved.iter().map(|&j| tv.a_t_t[j]).collect());
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Global indices of the preserved coordinates, in compact order.
    pub fn preserved(&self) -> &[usize] {
        &self.preserved
    }

    pub fn len(&self) -> usize {
        self.preserved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preserved.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.n && self.position[j] != SCREENED
    }

    /// Compact position of global index `j`.
    pub fn position_of(&self, j: usize) -> Option<usize> {
        (j < self.n && self.position[j] != SCREENED).then(|| self.position[j])
    }

    /// Column at compact position `k`.
    #[inline]
    pub fn col(&self, k: usize) -> &[f64] {
        &self.cols[k * self.m..(k + 1) * self.m]
    }

    #[inline]
    pub fn col_norm(&self, k: usize) -> f64 {
        self.col_norms[k]
    }

    #[inline]
    pub fn sq_norm(&self, k: usize) -> f64 {
        self.sq_norms[k]
    }

    #[inline]
    pub fn lower(&self, k: usize) -> f64 {
        self.lower[k]
    }

    #[inline]
    pub fn upper(&self, k: usize) -> f64 {
        self.upper[k]
    }

    #[inline]
    pub fn upper_is_inf(&self, k: usize) -> bool {
        self.upper_inf[k]
    }

    #[inline]
    pub fn clip(&self, k: usize, v: f64) -> f64 {
        v.max(self.lower[k]).min(self.upper[k])
    }

    /// `A^T t` aligned with the preserved set, when a translation is attached.
    pub fn a_t_t(&self) -> Option<&[f64]> {
        self.a_t_t.as_deref()
    }

    /// Any preserved coordinate with an infinite upper bound.
    pub fn has_unbounded(&self) -> bool {
        self.upper_inf.iter().any(|&b| b)
    }

    pub fn sat_lower(&self) -> &[usize] {
        &self.sat_lower
    }

    pub fn sat_upper(&self) -> &[usize] {
        &self.sat_upper
    }

    /// Contribution of the screened coordinates, `A_{S} x_{S}`.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn set_radius(&mut self, gap: f64, alpha: f64) -> Result<f64> {
        self.radius = gap_safe_radius(gap, alpha)?;
        Ok(self.radius)
    }

    pub fn screening_ratio(&self) -> f64 {
        (self.n - self.preserved.len()) as f64 / self.n as f64
    }

    /// `A_A^T v` aligned with the preserved set.
    pub fn adjoint_into(&self, v: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.len()).map(|k| linalg::dot(self.col(k), v)));
    }

    /// `A_A x_A + z`, with `x_preserved` aligned with the preserved set.
    pub fn forward_product(&self, x_preserved: &[f64]) -> Result<DVector<f64>> {
        if x_preserved.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "x_preserved has length {}, expected {}",
                x_preserved.len(),
                self.len()
            )));
        }
        let mut out = DVector::from_column_slice(&self.z);
        for (k, &xk) in x_preserved.iter().enumerate() {
            if xk != 0.0 {
                linalg::axpy(xk, self.col(k), out.as_mut_slice());
            }
        }
        Ok(out)
    }

    /// Same as [`forward_product`](Self::forward_product) reading `x` by global index.
    pub fn forward_from_full(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::from_column_slice(&self.z);
        for (k, &j) in self.preserved.iter().enumerate() {
            if x[j] != 0.0 {
                linalg::axpy(x[j], self.col(k), out.as_mut_slice());
            }
        }
        out
    }

    /// Sphere test on the preserved set.
    ///
    /// `a_t_theta[k]` is `a_j^T theta` for `j = preserved()[k]`. Returns the
    /// global indices proven to sit at their lower, resp. upper, bound.
    pub fn safe_screen_test(&self, a_t_theta: &[f64]) -> (Vec<usize>, Vec<usize>) {
        debug_assert_eq!(a_t_theta.len(), self.len());
        let r = self.radius;
        let mut new_lower = Vec::new();
        let mut new_upper = Vec::new();
        for (k, &g) in a_t_theta.iter().enumerate() {
            let margin = r * self.col_norms[k];
            if g < -margin {
                new_lower.push(self.preserved[k]);
            } else if !self.upper_inf[k] && g > margin {
                new_upper.push(self.preserved[k]);
            }
        }
        (new_lower, new_upper)
    }

    /// Fix newly screened coordinates at their bound, fold them into `z` and
    /// drop them from the preserved set.
    ///
    /// `forward`, when given, is any `m`-vector that tracks `A x` up to a
    /// constant (the forward product itself or the residual) and is kept in
    /// sync with the change in `x`.
    pub fn apply_screening(
        &mut self,
        new_lower: &[usize],
        new_upper: &[usize],
        x: &mut DVector<f64>,
        mut forward: Option<&mut [f64]>,
    ) -> Result<()> {
        for &j in new_lower.iter().chain(new_upper) {
            if !self.contains(j) {
                return Err(Error::IndexOutOfPreserved(j));
            }
        }
        let mut all: Vec<usize> = new_lower.iter().chain(new_upper).copied().collect();
        all.sort_unstable();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::IndexOutOfPreserved(w[0]));
        }
        let m = self.m;
        for (list, at_upper) in [(new_lower, false), (new_upper, true)] {
            for &j in list {
                let k = self.position[j];
                let value = if at_upper { self.upper[k] } else { self.lower[k] };
                let col = &self.cols[k * m..(k + 1) * m];
                let delta = value - x[j];
                if delta != 0.0 {
                    if let Some(f) = forward.as_deref_mut() {
                        linalg::axpy(delta, col, f);
                    }
                }
                if value != 0.0 {
                    linalg::axpy(value, col, &mut self.z);
                }
                x[j] = value;
                if at_upper {
                    self.sat_upper.push(j);
                } else {
                    self.sat_lower.push(j);
                }
                self.position[j] = SCREENED;
            }
        }
        self.compact();
        Ok(())
    }

    /// Drops every column whose position was set to `SCREENED`, keeping order.
    fn compact(&mut self) {
        let m = self.m;
        let mut w = 0;
        for k in 0..self.preserved.len() {
            let j = self.preserved[k];
            if self.position[j] == SCREENED {
                continue;
            }
            if w != k {
                self.cols.copy_within(k * m..(k + 1) * m, w * m);
                self.preserved[w] = j;
                self.col_norms[w] = self.col_norms[k];
                self.sq_norms[w] = self.sq_norms[k];
                self.lower[w] = self.lower[k];
                self.upper[w] = self.upper[k];
                self.upper_inf[w] = self.upper_inf[k];
                if let Some(att) = self.a_t_t.as_mut() {
                    att[w] = att[k];
                }
            }
            self.position[j] = w;
            w += 1;
        }
        self.preserved.truncate(w);
        self.cols.truncate(w * m);
        self.col_norms.truncate(w);
        self.sq_norms.truncate(w);
        self.lower.truncate(w);
        self.upper.truncate(w);
        self.upper_inf.truncate(w);
        if let Some(att) = self.a_t_t.as_mut() {
            att.truncate(w);
        }
    }
}
