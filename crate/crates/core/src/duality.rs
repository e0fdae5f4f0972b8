//! Dual objective, dual feasibility, duality gap and dual feasible points.
//!
//! The dual of the box-constrained problem reads
//!
//! ```text
//!   D(theta) = -sum_i f*(-theta_i; y_i) - sum_j l_j [A^T theta]_j^- - sum_{j not in J_inf} u_j [A^T theta]_j^+
//!   F_D      = { theta : a_j^T theta <= 0 for every j in J_inf }
//! ```
//!
//! where `[v]^- = min(v, 0)` and `[v]^+ = max(v, 0)`. With every upper bound
//! finite the dual is unconstrained and `-grad F(Ax)` is already a valid dual
//! point. Otherwise the point is translated along an interior direction `t`
//! (`A^T t < 0` on `J_inf`) just far enough to become feasible.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{eval_primal_with, Loss, PrimalPoint, Problem, QuadraticLoss};

/// Slack accepted on `a_j^T theta <= 0`.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Gaps above `-GAP_ROUNDOFF` are treated as round-off and clamped to zero.
pub const GAP_ROUNDOFF: f64 = 1e-9;

/// Relative margin required for interior translation vectors:
/// `a_j^T t < -INTERIOR_TOL * ||a_j||`.
pub const INTERIOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    #[serde(with = "crate::linalg::plain_vec")]
    pub theta: DVector<f64>,
    pub d_value: f64,
    pub gap: f64,
    #[serde(with = "crate::linalg::plain_vec")]
    pub a_t_theta: DVector<f64>,
}

/// Support function of `[l_j, u_j]` minus `x_j g`, i.e. `max_{v in box} v g - x_j g`.
///
/// Nonnegative for box-feasible `x_j`. For an infinite upper bound `g` is
/// assumed to be (numerically) nonpositive.
#[inline]
pub(crate) fn box_support_gap(lower: f64, upper: f64, upper_inf: bool, x: f64, g: f64) -> f64 {
    if g > 0.0 && !upper_inf {
        (upper - x) * g
    } else {
        (lower - x) * g
    }
}

/// Bound contribution of coordinate `j` to `D`: `-l_j [g]^- - u_j [g]^+`.
#[inline]
fn bound_term(lower: f64, upper: f64, upper_inf: bool, g: f64) -> f64 {
    let mut v = -lower * g.min(0.0);
    if !upper_inf {
        v -= upper * g.max(0.0);
    }
    v
}

pub fn eval_dual(p: &Problem, theta: &DVector<f64>) -> Result<f64> {
    eval_dual_with(&QuadraticLoss, p, theta)
}

pub fn eval_dual_with<L: Loss>(loss: &L, p: &Problem, theta: &DVector<f64>) -> Result<f64> {
    check_len(theta, p.m(), "theta")?;
    let a_t_theta = p.adjoint(theta);
    Ok(dual_value(loss, p, theta, &a_t_theta))
}

fn dual_value<L: Loss>(loss: &L, p: &Problem, theta: &DVector<f64>, a_t_theta: &DVector<f64>) -> f64 {
    let data: f64 = theta
        .iter()
        .zip(p.y().iter())
        .map(|(&t, &y)| -loss.conjugate(-t, y))
        .sum();
    let bounds: f64 = (0..p.n())
        .map(|j| bound_term(p.lower()[j], p.upper()[j], p.upper_is_inf(j), a_t_theta[j]))
        .sum();
    data + bounds
}

pub fn is_dual_feasible(p: &Problem, theta: &DVector<f64>) -> bool {
    if theta.len() != p.m() {
        return false;
    }
    p.j_inf()
        .iter()
        .all(|&j| linalg::dot(p.col(j), theta.as_slice()) <= FEASIBILITY_TOL)
}

/// `P(x) - D(theta)`, unclamped.
pub fn duality_gap(p: &Problem, pt: &PrimalPoint, theta: &DVector<f64>) -> Result<f64> {
    check_len(theta, p.m(), "theta")?;
    if !is_dual_feasible(p, theta) {
        return Err(Error::DualInfeasible);
    }
    let primal = eval_primal_with(&QuadraticLoss, p, pt)?;
    let dual = eval_dual(p, theta)?;
    Ok(primal - dual)
}

/// Clamp round-off negative gaps to zero; reject anything below `-GAP_ROUNDOFF`.
pub fn clamp_gap(gap: f64) -> Result<f64> {
    if gap.is_nan() || gap < -GAP_ROUNDOFF {
        Err(Error::InconsistentGap(gap))
    } else {
        Ok(gap.max(0.0))
    }
}

/// Duality gap written as a sum of nonnegative terms,
///
/// ```text
///   Gap = sum_i FY(ax_i, -theta_i; y_i) + sum_j (sigma_j(g_j) - x_j g_j),   g = A^T theta
/// ```
///
/// with `FY` the Fenchel-Young gap of the loss and `sigma_j` the support
/// function of `[l_j, u_j]`. Algebraically identical to `P(x) - D(theta)` but
/// free of the cancellation between two large numbers.
pub fn duality_gap_terms<L: Loss>(
    loss: &L,
    p: &Problem,
    x: &DVector<f64>,
    ax: &DVector<f64>,
    theta: &DVector<f64>,
    a_t_theta: &DVector<f64>,
) -> f64 {
    let data: f64 = (0..p.m())
        .map(|i| loss.fenchel_young_gap(ax[i], -theta[i], p.y()[i]))
        .sum();
    let bounds: f64 = (0..p.n())
        .map(|j| box_support_gap(p.lower()[j], p.upper()[j], p.upper_is_inf(j), x[j], a_t_theta[j]))
        .sum();
    data + bounds
}

/// Dual scaling: `theta = -grad F(Ax; y)`, valid when every upper bound is finite.
pub fn dual_point_bvlr(p: &Problem, pt: &PrimalPoint) -> Result<DualState> {
    if !p.all_upper_finite() {
        return Err(Error::WrongVariant);
    }
    p.is_feasible(&pt.x)?;
    let ax = forward_of(p, pt);
    let theta = neg_gradient(&QuadraticLoss, p, &ax);
    let a_t_theta = p.adjoint(&theta);
    finish_state(p, &pt.x, &ax, theta, a_t_theta)
}

/// Dual translation: `theta = Xi_t(-grad F(Ax; y))`.
pub fn dual_point_nnlr(p: &Problem, tv: &TranslationVector, pt: &PrimalPoint) -> Result<DualState> {
    p.is_feasible(&pt.x)?;
    tv.check_interior(p)?;
    let ax = forward_of(p, pt);
    let z = neg_gradient(&QuadraticLoss, p, &ax);
    let a_t_z = p.adjoint(&z);
    let eps = translation_epsilon(p.j_inf().iter().map(|&j| (a_t_z[j], tv.a_t_t[j])));
    let (theta, a_t_theta) = if eps == 0.0 {
        (z, a_t_z)
    } else {
        (&z + &tv.t * eps, &a_t_z + &tv.a_t_t * eps)
    };
    finish_state(p, &pt.x, &ax, theta, a_t_theta)
}

/// Dual scaling when every upper bound is finite, translation otherwise.
pub fn dual_point(p: &Problem, tv: Option<&TranslationVector>, pt: &PrimalPoint) -> Result<DualState> {
    if p.all_upper_finite() {
        dual_point_bvlr(p, pt)
    } else {
        let owned;
        let tv = match tv {
            Some(tv) => tv,
            None => {
                owned = select_translation_vector(p, TranslationStrategy::NegOnes)?;
                &owned
            }
        };
        dual_point_nnlr(p, tv, pt)
    }
}

fn forward_of(p: &Problem, pt: &PrimalPoint) -> DVector<f64> {
    match &pt.ax {
        Some(ax) if ax.len() == p.m() => ax.clone(),
        _ => p.forward(&pt.x),
    }
}

fn neg_gradient<L: Loss>(loss: &L, p: &Problem, ax: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(p.m(), |i, _| -loss.derivative(ax[i], p.y()[i]))
}

fn finish_state(
    p: &Problem,
    x: &DVector<f64>,
    ax: &DVector<f64>,
    theta: DVector<f64>,
    a_t_theta: DVector<f64>,
) -> Result<DualState> {
    let d_value = dual_value(&QuadraticLoss, p, &theta, &a_t_theta);
    let gap = clamp_gap(duality_gap_terms(&QuadraticLoss, p, x, ax, &theta, &a_t_theta))?;
    Ok(DualState {
        theta,
        d_value,
        gap,
        a_t_theta,
    })
}

/// `max_j (a_j^T z)^+ / |a_j^T t|` over the supplied `(a_j^T z, a_j^T t)` pairs.
#[inline]
pub(crate) fn translation_epsilon(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs.fold(
        0.0,
        |eps: f64, (az, at)| {
            if az > 0.0 {
                eps.max(az / at.abs())
            } else {
                eps
            }
        },
    )
}

/// `Xi_t(z) = z + (max_j (a_j^T z)^+ / |a_j^T t|) t`, the constraint ranging over `J_inf`.
///
/// Points that are already feasible come back unchanged.
pub fn dual_translate(p: &Problem, tv: &TranslationVector, z: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(z, p.m(), "z")?;
    tv.check_interior(p)?;
    let eps = translation_epsilon(
        p.j_inf()
            .iter()
            .map(|&j| (linalg::dot(p.col(j), z.as_slice()), tv.a_t_t[j])),
    );
    if eps == 0.0 {
        Ok(z.clone())
    } else {
        Ok(z + &tv.t * eps)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub enum TranslationStrategy {
    /// `t = -1`; interior for nonnegative `A` without zero columns.
    #[default]
    NegOnes,
    /// `t = -a_j`; interior when column `j` of `A^T A` is entrywise positive.
    NegColumn(usize),
    /// `t = -(1/n) sum_j a_j`, checked after the fact.
    NegMeanColumn,
    /// Least-norm solution of `A^T t = -1`; interior when `rank(A) = n <= m`.
    SolveLinear,
    /// User supplied, checked after the fact.
    Custom(#[serde(with = "crate::linalg::plain_vec")] DVector<f64>),
}

impl TranslationStrategy {
    pub fn label(&self) -> String {
        match self {
            Self::NegOnes => "neg-ones".into(),
            Self::NegColumn(j) => format!("neg-column={j}"),
            Self::NegMeanColumn => "neg-mean-column".into(),
            Self::SolveLinear => "solve-linear".into(),
            Self::Custom(_) => "custom".into(),
        }
    }
}

/// An interior direction of the dual feasible set with `A^T t` precomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationVector {
    #[serde(with = "crate::linalg::plain_vec")]
    pub t: DVector<f64>,
    #[serde(with = "crate::linalg::plain_vec")]
    pub a_t_t: DVector<f64>,
    pub strategy: TranslationStrategy,
}

impl TranslationVector {
    /// Wraps `t` after checking `a_j^T t < -INTERIOR_TOL ||a_j||` on `J_inf`.
    pub fn new(p: &Problem, t: DVector<f64>, strategy: TranslationStrategy) -> Result<Self> {
        check_len(&t, p.m(), "t")?;
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("translation vector"));
        }
        let a_t_t = p.adjoint(&t);
        for &j in p.j_inf() {
            let threshold = -INTERIOR_TOL * linalg::norm2(p.col(j));
            if !(a_t_t[j] < threshold) {
                return Err(Error::NoInteriorPoint {
                    index: j,
                    value: a_t_t[j],
                    threshold,
                });
            }
        }
        Ok(Self { t, a_t_t, strategy })
    }

    pub(crate) fn check_interior(&self, p: &Problem) -> Result<()> {
        if self.t.len() != p.m() || self.a_t_t.len() != p.n() {
            return Err(Error::DimensionMismatch(
                "translation vector does not match the problem".into(),
            ));
        }
        for &j in p.j_inf() {
            if !(self.a_t_t[j] < 0.0) {
                return Err(Error::NotInterior {
                    index: j,
                    value: self.a_t_t[j],
                });
            }
        }
        Ok(())
    }
}

pub fn select_translation_vector(p: &Problem, strategy: TranslationStrategy) -> Result<TranslationVector> {
    let (m, n) = (p.m(), p.n());
    let t = match &strategy {
        TranslationStrategy::NegOnes => DVector::from_element(m, -1.0),
        TranslationStrategy::NegColumn(j) => {
            if *j >= n {
                return Err(Error::BadConfig(format!("column {j} out of range (n = {n})")));
            }
            -DVector::from_column_slice(p.col(*j))
        }
        TranslationStrategy::NegMeanColumn => {
            let mut t = DVector::zeros(m);
            for j in 0..n {
                linalg::axpy(-1.0 / n as f64, p.col(j), t.as_mut_slice());
            }
            t
        }
        TranslationStrategy::SolveLinear => solve_linear(p.a(), &DVector::from_element(n, -1.0))?,
        TranslationStrategy::Custom(t) => t.clone(),
    };
    TranslationVector::new(p, t, strategy)
}

/// Least-norm `t = A (A^T A)^{-1} b`.
fn solve_linear(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if n > m {
        return Err(Error::SingularGram);
    }
    let gram = a.tr_mul(a);
    let chol = factor_spd(gram).ok_or(Error::SingularGram)?;
    Ok(a * chol.solve(b))
}

/// Cholesky factorization that also rejects numerically rank-deficient input:
/// every pivot must keep at least `1e-10` of its diagonal entry.
pub(crate) fn factor_spd(g: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let diag: Vec<f64> = g.diagonal().iter().copied().collect();
    let chol = Cholesky::new(g)?;
    let l = chol.l_dirty();
    for (i, &d) in diag.iter().enumerate() {
        let piv = l[(i, i)] * l[(i, i)];
        if !(piv > 1e-10 * d) {
            return None;
        }
    }
    Some(chol)
}

/// Column whose summed cosine similarity with the other columns is largest.
pub fn most_correlated_column(a: &DMatrix<f64>) -> usize {
    let scores = correlation_scores(a);
    argmax(scores.iter().copied())
}

/// Column whose summed cosine similarity with the other columns is smallest.
pub fn least_correlated_column(a: &DMatrix<f64>) -> usize {
    let scores = correlation_scores(a);
    argmax(scores.iter().map(|s| -s))
}

fn correlation_scores(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.ncols();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let gram = a.tr_mul(a);
    (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j)
                .map(|k| gram[(j, k)] / (norms[j] * norms[k]))
                .sum()
        })
        .collect()
}

fn argmax(it: impl Iterator<Item = f64>) -> usize {
    it.enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) },
        )
        .0
}

/// First column `j` with `(A^T A)_{kj} > 0` for every `k`, if any.
pub fn positive_gram_column(a: &DMatrix<f64>) -> Option<usize> {
    let gram = a.tr_mul(a);
    (0..a.ncols()).find(|&j| gram.column(j).iter().all(|&v| v > 0.0))
}

fn check_len(v: &DVector<f64>, len: usize, what: &str) -> Result<()> {
    if v.len() != len {
        Err(Error::DimensionMismatch(format!(
            "{what} has length {}, expected {len}",
            v.len()
        )))
    } else {
        Ok(())
    }
}
