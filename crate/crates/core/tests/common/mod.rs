//! Random small instances and independent oracles shared by the integration tests.
#![allow(dead_code)]

use boxscreen::Problem;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Nnls,
    Bvls,
    Mixed,
}

pub const KINDS: [Kind; 3] = [Kind::Nnls, Kind::Bvls, Kind::Mixed];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gaussian(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| normal(rng))
}

pub fn half_normal(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| normal(rng).abs())
}

/// A random instance of the given kind with `m, n <= 60`.
///
/// NNLS and mixed instances use nonnegative `A` so that `t = -1` is interior.
pub fn instance(kind: Kind, seed: u64) -> Problem {
    let mut r = rng(seed);
    let n = r.random_range(2..=40);
    let m = r.random_range(2..=60);
    match kind {
        Kind::Nnls => {
            let a = half_normal(&mut r, m, n);
            let xbar = DVector::from_fn(n, |_, _| if r.random_bool(0.3) { normal(&mut r).abs() } else { 0.0 });
            let noise = r.random_range(0.1..2.0);
            let y = &a * xbar + DVector::from_fn(m, |_, _| noise * normal(&mut r));
            Problem::nnls(a, y).unwrap()
        }
        Kind::Bvls => {
            let a = gaussian(&mut r, m, n);
            let b = r.random_range(0.05..2.0);
            let scale = r.random_range(0.5..5.0);
            let y = DVector::from_fn(m, |_, _| scale * normal(&mut r));
            Problem::boxed(a, y, -b, b).unwrap()
        }
        Kind::Mixed => {
            let a = half_normal(&mut r, m, n);
            let lower = DVector::from_fn(n, |_, _| {
                if r.random_bool(0.5) {
                    0.0
                } else {
                    -r.random_range(0.0..1.0)
                }
            });
            let upper = DVector::from_fn(n, |j, _| {
                if r.random_bool(0.5) {
                    f64::INFINITY
                } else {
                    lower[j] + r.random_range(0.2..2.0)
                }
            });
            let xbar = DVector::from_fn(n, |j, _| {
                let hi = if upper[j].is_finite() {
                    upper[j] + 0.5
                } else {
                    lower[j] + 2.0
                };
                r.random_range(lower[j] - 0.5..hi)
            });
            let noise = r.random_range(0.1..2.0);
            let y = &a * xbar + DVector::from_fn(m, |_, _| noise * normal(&mut r));
            Problem::new(a, y, lower, upper).unwrap()
        }
    }
}

pub fn primal_value(p: &Problem, x: &DVector<f64>) -> f64 {
    0.5 * (p.a() * x - p.y()).norm_squared()
}

/// Dual objective written out from the conjugates, independent of the library:
/// `D(theta) = sum_i (theta_i y_i - theta_i^2 / 2) - sum_j sigma_j(a_j^T theta)` with
/// `sigma_j(g) = u_j g` for `g > 0` and `l_j g` otherwise. `None` when `theta`
/// violates `a_j^T theta <= 1e-12` on an unbounded coordinate.
pub fn dual_value(p: &Problem, theta: &DVector<f64>) -> Option<f64> {
    let g = p.a().transpose() * theta;
    let mut d: f64 = theta.iter().zip(p.y().iter()).map(|(t, y)| t * y - 0.5 * t * t).sum();
    for j in 0..p.n() {
        let (l, u) = (p.lower()[j], p.upper()[j]);
        if g[j] > 0.0 {
            if u.is_infinite() {
                if g[j] > 1e-12 {
                    return None;
                }
            } else {
                d -= u * g[j];
            }
        } else {
            d -= l * g[j];
        }
    }
    Some(d)
}

/// Minimizer over all `3^n` patterns (lower, upper or free per coordinate):
/// free coordinates solve the restricted normal equations and the pattern
/// counts only if the result lies in the box. With `l = 0, u = inf` this is
/// the `2^n` active/passive enumeration.
pub fn pattern_oracle(p: &Problem) -> (DVector<f64>, f64) {
    let n = p.n();
    let states: Vec<u8> = (0..n).map(|j| if p.upper_is_inf(j) { 2 } else { 3 }).collect();
    let total: usize = states.iter().map(|&s| s as usize).product();
    let mut best = (p.initial_point(), f64::INFINITY);
    for code in 0..total {
        let mut c = code;
        let mut x = DVector::zeros(n);
        let mut free = Vec::new();
        for j in 0..n {
            let s = states[j] as usize;
            match c % s {
                0 => x[j] = p.lower()[j],
                1 => free.push(j),
                _ => x[j] = p.upper()[j],
            }
            c /= s;
        }
        if !free.is_empty() {
            let af = DMatrix::from_fn(p.m(), free.len(), |i, k| p.a()[(i, free[k])]);
            let rhs = p.y() - p.a() * &x;
            let Some(chol) = (af.transpose() * &af).cholesky() else {
                continue;
            };
            let xf = chol.solve(&(af.transpose() * rhs));
            for (k, &j) in free.iter().enumerate() {
                x[j] = xf[k];
            }
            if free.iter().any(|&j| x[j] < p.lower()[j] || x[j] > p.upper()[j]) {
                continue;
            }
        }
        let f = primal_value(p, &x);
        if f < best.1 {
            best = (x, f);
        }
    }
    best
}
