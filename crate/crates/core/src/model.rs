//! Problem definition, the loss abstraction and primal objective evaluation.
//!
//! A [`Problem`] is the box-constrained regression
//!
//! ```text
//!   minimize  sum_i f([A x]_i ; y_i)   subject to  l <= x <= u
//! ```
//!
//! with `u_j = +inf` allowed. Only the quadratic loss `f(z; y) = (z - y)^2 / 2`
//! ships, but everything that does not depend on the closed forms of the
//! least-squares solvers goes through the [`Loss`] trait.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Scalar data-fidelity term `f(z; y)` with Lipschitz derivative `1 / alpha`.
pub trait Loss {
    fn value(&self, z: f64, y: f64) -> f64;

    /// Derivative with respect to `z`.
    fn derivative(&self, z: f64, y: f64) -> f64;

    /// Fenchel conjugate with respect to the first argument, `sup_z (u z - f(z; y))`.
    fn conjugate(&self, u: f64, y: f64) -> f64;

    /// Strong concavity constant of the dual.
    fn alpha(&self) -> f64;

    /// `f(z; y) + f*(u; y) - z u`, nonnegative and zero iff `u = f'(z; y)`.
    fn fenchel_young_gap(&self, z: f64, u: f64, y: f64) -> f64 {
        self.value(z, y) + self.conjugate(u, y) - z * u
    }
}

/// `f(z; y) = (z - y)^2 / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuadraticLoss;

impl Loss for QuadraticLoss {
    #[inline]
    fn value(&self, z: f64, y: f64) -> f64 {
        0.5 * (z - y) * (z - y)
    }

    #[inline]
    fn derivative(&self, z: f64, y: f64) -> f64 {
        z - y
    }

    #[inline]
    fn conjugate(&self, u: f64, y: f64) -> f64 {
        u * y + 0.5 * u * u
    }

    #[inline]
    fn alpha(&self) -> f64 {
        1.0
    }

    #[inline]
    fn fenchel_young_gap(&self, z: f64, u: f64, y: f64) -> f64 {
        let d = z - y - u;
        0.5 * d * d
    }
}

pub fn eval_loss(z: f64, y: f64) -> f64 {
    QuadraticLoss.value(z, y)
}

pub fn grad_loss(z: f64, y: f64) -> f64 {
    QuadraticLoss.derivative(z, y)
}

pub fn conj_loss(u: f64, y: f64) -> f64 {
    QuadraticLoss.conjugate(u, y)
}

/// Immutable regression instance.
///
/// `A` is stored column-major (nalgebra's native layout) so a column is a
/// contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    a: DMatrix<f64>,
    y: DVector<f64>,
    lower: DVector<f64>,
    upper: DVector<f64>,
    j_inf: Vec<usize>,
    upper_is_inf: Vec<bool>,
}

impl Problem {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>, lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "design matrix must be non-empty, got {m}x{n}"
            )));
        }
        if y.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "y has length {}, expected {m}",
                y.len()
            )));
        }
        if lower.len() != n || upper.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "bounds have lengths {}/{}, expected {n}",
                lower.len(),
                upper.len()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design matrix"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("data vector"));
        }
        let mut j_inf = Vec::new();
        let mut upper_is_inf = vec![false; n];
        for j in 0..n {
            let (l, u) = (lower[j], upper[j]);
            if !l.is_finite() || u.is_nan() || u == f64::NEG_INFINITY || l >= u {
                return Err(Error::InvalidBounds {
                    index: j,
                    lower: l,
                    upper: u,
                });
            }
            if u == f64::INFINITY {
                j_inf.push(j);
                upper_is_inf[j] = true;
            }
        }
        for j in 0..n {
            if a.column(j).iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroColumn(j));
            }
        }
        Ok(Self {
            a,
            y,
            lower,
            upper,
            j_inf,
            upper_is_inf,
        })
    }

    /// `l = 0`, `u = +inf`.
    pub fn nnls(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let n = a.ncols();
        Self::new(a, y, DVector::zeros(n), DVector::from_element(n, f64::INFINITY))
    }

    /// Uniform box `[lo, hi]` on every coordinate.
    pub fn boxed(a: DMatrix<f64>, y: DVector<f64>, lo: f64, hi: f64) -> Result<Self> {
        let n = a.ncols();
        Self::new(a, y, DVector::from_element(n, lo), DVector::from_element(n, hi))
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Column `j` as a contiguous slice.
    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        let m = self.m();
        &self.a.as_slice()[j * m..(j + 1) * m]
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    /// Indices with an infinite upper bound, ascending.
    pub fn j_inf(&self) -> &[usize] {
        &self.j_inf
    }

    #[inline]
    pub fn upper_is_inf(&self, j: usize) -> bool {
        self.upper_is_inf[j]
    }

    /// Every upper bound finite: the dual is unconstrained.
    pub fn all_upper_finite(&self) -> bool {
        self.j_inf.is_empty()
    }

    /// `l = 0` and `u = +inf` everywhere.
    pub fn is_nonnegative(&self) -> bool {
        self.j_inf.len() == self.n() && self.lower.iter().all(|&l| l == 0.0)
    }

    #[inline]
    pub fn clip(&self, j: usize, v: f64) -> f64 {
        v.max(self.lower[j]).min(self.upper[j])
    }

    /// Box projection of the origin.
    pub fn initial_point(&self) -> DVector<f64> {
        DVector::from_fn(self.n(), |j, _| self.clip(j, 0.0))
    }

    pub fn is_feasible(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, expected {}",
                x.len(),
                self.n()
            )));
        }
        for j in 0..self.n() {
            if !(x[j] >= self.lower[j] && x[j] <= self.upper[j]) {
                return Err(Error::InfeasiblePoint(j));
            }
        }
        Ok(())
    }

    /// Dense `A x`.
    pub fn forward(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.m());
        for j in 0..self.n() {
            if x[j] != 0.0 {
                linalg::axpy(x[j], self.col(j), out.as_mut_slice());
            }
        }
        out
    }

    /// Dense `A^T v`.
    pub fn adjoint(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n(), |j, _| linalg::dot(self.col(j), v.as_slice()))
    }

    /// Euclidean column norms.
    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.n()).map(|j| linalg::norm2(self.col(j))).collect()
    }
}

/// A box-feasible primal point with an optional cached forward product.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub x: DVector<f64>,
    pub ax: Option<DVector<f64>>,
}

impl PrimalPoint {
    pub fn new(x: DVector<f64>) -> Self {
        Self { x, ax: None }
    }

    /// Point with `A x` cached.
    pub fn with_forward(p: &Problem, x: DVector<f64>) -> Self {
        let ax = p.forward(&x);
        Self { x, ax: Some(ax) }
    }

    fn forward(&self, p: &Problem) -> DVector<f64> {
        match &self.ax {
            Some(ax) if ax.len() == p.m() => ax.clone(),
            _ => p.forward(&self.x),
        }
    }
}

/// `P(x)` for the quadratic loss.
pub fn eval_primal(p: &Problem, pt: &PrimalPoint) -> Result<f64> {
    eval_primal_with(&QuadraticLoss, p, pt)
}

pub fn eval_primal_with<L: Loss>(loss: &L, p: &Problem, pt: &PrimalPoint) -> Result<f64> {
    p.is_feasible(&pt.x)?;
    let ax = pt.forward(p);
    Ok(ax.iter().zip(p.y().iter()).map(|(&z, &y)| loss.value(z, y)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn loss_examples() {
        assert_eq!(eval_loss(1.0, 1.0), 0.0);
        assert_eq!(eval_loss(2.0, 0.0), 2.0);
        assert_eq!(eval_loss(0.0, 3.0), 4.5);
        assert_eq!(grad_loss(1.0, 1.0), 0.0);
        assert_eq!(grad_loss(2.0, 0.0), 2.0);
        assert_eq!(grad_loss(0.0, 3.0), -3.0);
        assert_eq!(conj_loss(0.0, 5.0), 0.0);
        assert_eq!(conj_loss(1.0, 1.0), 1.5);
        assert_eq!(conj_loss(-1.0, -1.0), 1.5);
    }

    #[test]
    fn conjugate_matches_supremum_on_a_grid() {
        // sup_z (u z - f(z; y)) by brute force over a fine grid
        for &(u, y) in &[(1.0, 1.0), (-0.5, 2.0), (3.0, -1.0)] {
            let brute = (-40_000..=40_000)
                .map(|k| k as f64 * 1e-3)
                .map(|z| u * z - eval_loss(z, y))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((brute - conj_loss(u, y)).abs() < 1e-6);
        }
    }

    #[test]
    fn primal_examples() {
        let p = Problem::nnls(eye(2), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let v = |x: Vec<f64>| eval_primal(&p, &PrimalPoint::new(DVector::from_vec(x))).unwrap();
        assert_eq!(v(vec![1.0, 1.0]), 0.0);
        assert_eq!(v(vec![1.0, 0.0]), 0.5);

        let p = Problem::nnls(
            DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
            DVector::from_vec(vec![2.0, 0.0]),
        )
        .unwrap();
        let pt = PrimalPoint::new(DVector::from_vec(vec![1.0]));
        assert_eq!(eval_primal(&p, &pt).unwrap(), 1.0);
    }

    #[test]
    fn primal_rejects_infeasible_point() {
        let p = Problem::nnls(eye(2), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        let pt = PrimalPoint::new(DVector::from_vec(vec![1.0, -1e-300]));
        assert!(matches!(eval_primal(&p, &pt), Err(Error::InfeasiblePoint(1))));
    }

    #[test]
    fn construction_validates() {
        let y = DVector::from_vec(vec![1.0, 1.0]);
        let bad = Problem::new(
            eye(2),
            y.clone(),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![1.0, 1.0]),
        );
        assert!(matches!(bad, Err(Error::InvalidBounds { index: 1, .. })));

        let mut a = eye(2);
        a[(0, 0)] = f64::NAN;
        assert!(matches!(Problem::nnls(a, y.clone()), Err(Error::NonFinite(_))));

        let a = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(Problem::nnls(a, y.clone()), Err(Error::ZeroColumn(1))));

        assert!(matches!(Problem::nnls(eye(3), y), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn j_inf_tracks_infinite_upper_bounds() {
        let p = Problem::new(
            eye(3),
            DVector::zeros(3),
            DVector::from_vec(vec![0.0, -1.0, 0.0]),
            DVector::from_vec(vec![f64::INFINITY, 2.0, f64::INFINITY]),
        )
        .unwrap();
        assert_eq!(p.j_inf(), &[0, 2]);
        assert!(!p.all_upper_finite());
        assert!(!p.is_nonnegative());
        assert_eq!(p.initial_point().as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn cached_and_uncached_primal_agree() {
        let a = DMatrix::from_fn(5, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let y = DVector::from_fn(5, |i, _| i as f64 * 0.3 - 0.4);
        let p = Problem::boxed(a, y, -1.0, 1.0).unwrap();
        let x = DVector::from_vec(vec![0.2, -0.7, 1.0, 0.1]);
        let plain = eval_primal(&p, &PrimalPoint::new(x.clone())).unwrap();
        let cached = eval_primal(&p, &PrimalPoint::with_forward(&p, x)).unwrap();
        assert!((plain - cached).abs() <= 1e-10 * plain.abs().max(1e-300));
    }

    proptest! {
        #[test]
        fn fenchel_young(z in -10.0..10.0f64, u in -10.0..10.0f64, y in -10.0..10.0f64) {
            let l = QuadraticLoss;
            prop_assert!(eval_loss(z, y) + conj_loss(u, y) - z * u >= -1e-12);
            let u_opt = grad_loss(z, y);
            prop_assert!((eval_loss(z, y) + conj_loss(u_opt, y) - z * u_opt).abs() < 1e-9);
            let direct = l.value(z, y) + l.conjugate(u, y) - z * u;
            prop_assert!((l.fenchel_young_gap(z, u, y) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
        }

        #[test]
        fn derivative_matches_central_difference(z in -10.0..10.0f64, y in -10.0..10.0f64) {
            let h = 1e-5;
            let fd = (eval_loss(z + h, y) - eval_loss(z - h, y)) / (2.0 * h);
            prop_assert!((grad_loss(z, y) - fd).abs() < 1e-6);
        }

        #[test]
        fn derivative_is_lipschitz(z1 in -10.0..10.0f64, z2 in -10.0..10.0f64, y in -10.0..10.0f64) {
            let alpha = QuadraticLoss.alpha();
            // a few ulps of slack: z - y is rounded before the difference is taken
            let slack = 4.0 * f64::EPSILON * (z1.abs() + z2.abs() + 2.0 * y.abs());
            prop_assert!((grad_loss(z1, y) - grad_loss(z2, y)).abs() <= (z1 - z2).abs() / alpha + slack);
        }
    }
}
