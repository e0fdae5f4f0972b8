use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg;

const RITZ_TOL: f64 = 1e-5;
const CHECK_EVERY: usize = 5;

/// Largest singular value of `A` from a Lanczos run on `A^T A`.
///
/// Starts from a seeded Gaussian vector and takes at most `iters` steps with
/// full reorthogonalization. The result is a Ritz value, so it never exceeds
/// `||A||_2` beyond round-off. Plain power iteration with the same budget
/// stalls when the two leading singular values are close.
///
/// Every few steps the top Ritz pair is checked against the usual residual
/// bound `beta_k |s_k|`; the run stops early once that is below
/// `RITZ_TOL` relative to the Ritz value.
pub fn spectral_norm_estimate(a: &DMatrix<f64>, iters: usize, seed: u64) -> f64 {
    spectral_norm_of_columns(a.nrows(), a.as_slice(), iters, seed)
}

/// Same as [`spectral_norm_estimate`] on a column-major buffer with `m` rows.
pub fn spectral_norm_of_columns(m: usize, cols: &[f64], iters: usize, seed: u64) -> f64 {
    if m == 0 || cols.is_empty() {
        return 0.0;
    }
    let n = cols.len() / m;
    let col = |j: usize| &cols[j * m..(j + 1) * m];
    let gram_apply = |v: &DVector<f64>| {
        let mut av = vec![0.0; m];
        for j in 0..n {
            linalg::axpy(v[j], col(j), &mut av);
        }
        DVector::from_fn(n, |j, _| linalg::dot(col(j), &av))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    if v.norm() == 0.0 {
        v.fill(1.0);
    }
    v /= v.norm();

    let steps = iters.max(1).min(n);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(steps);
    let mut diag = Vec::with_capacity(steps);
    let mut off = Vec::with_capacity(steps);
    for i in 0..steps {
        let mut w = gram_apply(&v);
        let a = v.dot(&w);
        diag.push(a);
        basis.push(v.clone());
        if i + 1 == steps {
            break;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let b = w.norm();
        if b <= 1e-12 * a.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if (i + 1) % CHECK_EVERY == 0 {
            let (theta, last) = top_ritz(&diag, &off);
            if b * last.abs() <= RITZ_TOL * theta {
                break;
            }
        }
        off.push(b);
        v = w / b;
    }
    top_ritz(&diag, &off).0.max(0.0).sqrt()
}

/// Largest eigenvalue of the Lanczos tridiagonal and the last entry of its eigenvector.
fn top_ritz(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let k = diag.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            diag[i]
        } else if i + 1 == j {
            off[i]
        } else if j + 1 == i {
            off[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    (eig.eigenvalues[top], eig.eigenvectors[(k - 1, top)])
}
