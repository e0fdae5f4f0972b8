//! Synthetic instances.
//!
//! Every array is drawn from its own ChaCha20 stream of the same seed, so
//! changing `n` does not perturb the draw of `y` or the noise, and the
//! instances are reproducible across platforms.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Problem;

/// Recorded in generated metadata.
pub const PRNG_NAME: &str =
    "ChaCha20 (rand_chacha), one stream per array: 0 = A, 1 = y or noise, 2 = support, 3 = values";

const STREAM_A: u64 = 0;
const STREAM_Y: u64 = 1;
const STREAM_SUPPORT: u64 = 2;
const STREAM_VALUES: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `a_ij, y_i ~ N(0, 1)`, box `[-b, b]`.
    BvlsGaussian,
    /// `a_ij = |N(0, 1)|`, `y = A x + noise` with a sparse nonnegative `x`.
    NnlsHalfNormal,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bvls" | "bvls-gaussian" => Ok(Self::BvlsGaussian),
            "nnls" | "nnls-half-normal" => Ok(Self::NnlsHalfNormal),
            other => Err(Error::BadSpec(format!("unknown family `{other}`"))),
        }
    }
}

fn default_halfwidth() -> f64 {
    1.0
}

fn default_sparsity() -> f64 {
    0.05
}

fn default_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub m: usize,
    pub n: usize,
    /// Box half-width `b` (BVLS only).
    #[serde(default = "default_halfwidth")]
    pub box_halfwidth: f64,
    /// Fraction of nonzeros in the planted `x` (NNLS only).
    #[serde(default = "default_sparsity")]
    pub sparsity: f64,
    #[serde(default = "default_noise")]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GenSpec {
    pub fn bvls(m: usize, n: usize, b: f64, seed: u64) -> Self {
        Self {
            family: Family::BvlsGaussian,
            m,
            n,
            box_halfwidth: b,
            sparsity: default_sparsity(),
            noise_std: default_noise(),
            seed,
        }
    }

    pub fn nnls(m: usize, n: usize, seed: u64) -> Self {
        Self {
            family: Family::NnlsHalfNormal,
            m,
            n,
            box_halfwidth: default_halfwidth(),
            sparsity: default_sparsity(),
            noise_std: default_noise(),
            seed,
        }
    }

    /// Number of nonzeros of the planted NNLS solution.
    pub fn support_size(&self) -> usize {
        (self.sparsity * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::BadSpec(format!(
                "m and n must be at least 1, got {}x{}",
                self.m, self.n
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::BadSpec(format!(
                "noise_std must be finite and nonnegative, got {}",
                self.noise_std
            )));
        }
        match self.family {
            Family::BvlsGaussian => {
                if !(self.box_halfwidth > 0.0 && self.box_halfwidth.is_finite()) {
                    return Err(Error::BadSpec(format!(
                        "box half-width must be positive and finite, got {}",
                        self.box_halfwidth
                    )));
                }
            }
            Family::NnlsHalfNormal => {
                if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
                    return Err(Error::BadSpec(format!(
                        "sparsity must lie in (0, 1], got {}",
                        self.sparsity
                    )));
                }
                if self.support_size() < 1 {
                    return Err(Error::BadSpec(format!(
                        "sparsity * n = {} leaves the planted solution empty",
                        self.sparsity * self.n as f64
                    )));
                }
            }
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Column-major Gaussian matrix; `abs` folds it into a half-normal one.
fn gaussian_matrix(m: usize, n: usize, seed: u64, abs: bool) -> DMatrix<f64> {
    let mut rng = stream(seed, STREAM_A);
    DMatrix::from_fn(m, n, |_, _| {
        let v = normal(&mut rng);
        if abs {
            v.abs()
        } else {
            v
        }
    })
}

pub fn gen_bvls(spec: &GenSpec) -> Result<Problem> {
    if spec.family != Family::BvlsGaussian {
        return Err(Error::BadSpec("gen_bvls needs the bvls-gaussian family".into()));
    }
    spec.validate()?;
    let a = gaussian_matrix(spec.m, spec.n, spec.seed, false);
    let mut rng = stream(spec.seed, STREAM_Y);
    let y = DVector::from_fn(spec.m, |_, _| normal(&mut rng));
    Problem::boxed(a, y, -spec.box_halfwidth, spec.box_halfwidth)
}

/// NNLS instance together with its planted solution.
pub fn gen_nnls_with_truth(spec: &GenSpec) -> Result<(Problem, DVector<f64>)> {
    if spec.family != Family::NnlsHalfNormal {
        return Err(Error::BadSpec("gen_nnls needs the nnls-half-normal family".into()));
    }
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let a = gaussian_matrix(m, n, spec.seed, true);
    if let Some(j) = (0..n).find(|&j| a.column(j).iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroColumn(j));
    }

    let mut support_rng = stream(spec.seed, STREAM_SUPPORT);
    let mut support = index::sample(&mut support_rng, n, spec.support_size()).into_vec();
    support.sort_unstable();
    let mut value_rng = stream(spec.seed, STREAM_VALUES);
    let mut truth = DVector::zeros(n);
    for &j in &support {
        truth[j] = normal(&mut value_rng).abs();
    }

    let mut noise_rng = stream(spec.seed, STREAM_Y);
    let mut y = &a * &truth;
    for v in y.iter_mut() {
        *v += spec.noise_std * normal(&mut noise_rng);
    }
    Ok((Problem::nnls(a, y)?, truth))
}

pub fn gen_nnls(spec: &GenSpec) -> Result<Problem> {
    gen_nnls_with_truth(spec).map(|(p, _)| p)
}

pub fn generate(spec: &GenSpec) -> Result<Problem> {
    match spec.family {
        Family::BvlsGaussian => gen_bvls(spec),
        Family::NnlsHalfNormal => gen_nnls(spec),
    }
}
