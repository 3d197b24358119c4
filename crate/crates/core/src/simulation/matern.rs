//! Matern covariance construction and multivariate normal sampling via a
//! jittered Cholesky factorization.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::special::{ln_bessel_k, ln_gamma};

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    #[cfg(test)]
    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

/// Matern correlation matrix over centroid distances:
/// `Sigma_ij = (2^(nu-1) Gamma(nu))^(-1) (2 sqrt(nu) D_ij phi)^nu
///             K_nu(2 sqrt(nu) D_ij phi)`,
/// with unit diagonal (`D_ii = 0` by convention). Evaluated in log space so
/// large orders neither overflow nor underflow.
pub fn matern_cov(centroids: &[(f64, f64)], nu: f64, phi: f64) -> Result<SymMatrix> {
    if !(nu > 0.0 && phi > 0.0) || !nu.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Matern needs nu > 0 and phi > 0, got ({nu}, {phi})"
        )));
    }
    if centroids.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if centroids.iter().any(|c| !c.0.is_finite() || !c.1.is_finite()) {
        return Err(Error::InvalidParameter("centroids must be finite".into()));
    }
    let n = centroids.len();
    let log_norm = -(nu - 1.0) * std::f64::consts::LN_2 - ln_gamma(nu);
    let mut out = SymMatrix {
        n,
        data: vec![0.0; n * n],
    };
    for i in 0..n {
        out.set(i, i, 1.0);
        for j in (i + 1)..n {
            let dx = centroids[i].0 - centroids[j].0;
            let dy = centroids[i].1 - centroids[j].1;
            let d = (dx * dx + dy * dy).sqrt();
            let value = if d == 0.0 {
                1.0
            } else {
                let x = 2.0 * nu.sqrt() * d * phi;
                (log_norm + nu * x.ln() + ln_bessel_k(nu, x)).exp()
            };
            out.set(i, j, value);
        }
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor of a covariance matrix, with escalating
/// diagonal jitter (up to `1e-8`) when the matrix is not numerically
/// positive definite.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>,
    pub jitter: f64,
}

impl CholeskyFactor {
    pub fn new(cov: &SymMatrix) -> Result<Self> {
        let jitters = [0.0, 1e-12, 1e-10, 1e-8];
        for &jitter in &jitters {
            if let Some(lower) = try_cholesky(cov, jitter) {
                return Ok(Self {
                    n: cov.n,
                    lower,
                    jitter,
                });
            }
        }
        Err(Error::Numerical(
            "covariance factorization failed even with 1e-8 diagonal jitter".into(),
        ))
    }

    /// One zero-mean draw with covariance `scale^2 * Sigma`.
    pub fn sample<R: Rng>(&self, scale: f64, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.n).map(|_| StandardNormal.sample(rng)).collect();
        (0..self.n)
            .map(|i| {
                let acc: f64 = self.lower[i * self.n..i * self.n + i + 1]
                    .iter()
                    .zip(&z)
                    .map(|(l, zj)| l * zj)
                    .sum();
                scale * acc
            })
            .collect()
    }
}

fn try_cholesky(cov: &SymMatrix, jitter: f64) -> Option<Vec<f64>> {
    let n = cov.n;
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = cov.get(i, j);
            if i == j {
                sum += jitter;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}
