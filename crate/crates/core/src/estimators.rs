//! Competing ensembles of point estimates derived from a joint posterior:
//! posterior means (SSEL), posterior quantiles/medians, the
//! constrained-Bayes spread correction, rank-weighted WRSEL averages, the
//! triple-goal construction, and an MLE pass-through.

use crate::ensemble::{
    permutation_ranks, sorted_quantile, tied_max_ranks, Ensemble, PosteriorDrawMatrix,
};
use crate::error::{Error, Result};
use crate::scalar::{cmp_finite, mean, population_variance, Real};

/// Which decision rule produced an ensemble of point estimates. Carried for
/// provenance in loss reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorRule {
    Mle,
    Ssel,
    Median,
    Quantile(f64),
    Wrsel { a1: f64, a2: f64 },
    Cb,
    Gr,
}

impl std::fmt::Display for EstimatorRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorRule::Mle => write!(f, "MLE"),
            EstimatorRule::Ssel => write!(f, "SSEL"),
            EstimatorRule::Median => write!(f, "MED"),
            EstimatorRule::Quantile(q) => write!(f, "QUANT({q})"),
            EstimatorRule::Wrsel { a1, a2 } => write!(f, "WRSEL({a1},{a2})"),
            EstimatorRule::Cb => write!(f, "CB"),
            EstimatorRule::Gr => write!(f, "GR"),
        }
    }
}

/// An ensemble of point estimates tagged with the rule that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleEstimate<T> {
    values: Ensemble<T>,
    rule: EstimatorRule,
}

impl<T: Real> EnsembleEstimate<T> {
    pub fn new(values: Ensemble<T>, rule: EstimatorRule) -> Self {
        Self { values, rule }
    }

    pub fn values(&self) -> &[T] {
        self.values.values()
    }

    pub fn ensemble(&self) -> &Ensemble<T> {
        &self.values
    }

    pub fn rule(&self) -> EstimatorRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Posterior means: the minimizer of posterior expected summed squared error.
pub fn ssel_estimate<T: Real>(m: &PosteriorDrawMatrix<T>) -> EnsembleEstimate<T> {
    let values = Ensemble::new(m.column_means()).expect("means of finite draws are finite");
    EnsembleEstimate::new(values, EstimatorRule::Ssel)
}

/// Per-unit posterior `q`-quantiles (type-1 on each column), `0 < q < 1`.
/// `q = 0.5` gives the vector of posterior medians.
pub fn posterior_quantile_estimate<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    q: T,
) -> Result<EnsembleEstimate<T>> {
    if q <= T::zero() || q >= T::one() {
        return Err(Error::InvalidProbability(q.to_f64().unwrap_or(f64::NAN)));
    }
    let values = Ensemble::new(m.column_quantiles(q)?)?;
    let rule = if q == T::half() {
        EstimatorRule::Median
    } else {
        EstimatorRule::Quantile(q.to_f64().unwrap())
    };
    Ok(EnsembleEstimate::new(values, rule))
}

/// Inputs of the constrained-Bayes correction: per-unit posterior means and
/// variances, and the spread weight `omega`.
///
/// `omega = sqrt(1 + mean(post_vars) / var(post_means))`, with the Monte
/// Carlo variance convention (denominator `S`) for `post_vars` and the
/// population convention (denominator `n`) for `var(post_means)`.
#[derive(Debug, Clone)]
pub struct CbInputs<T> {
    pub post_means: Vec<T>,
    pub post_vars: Vec<T>,
    pub omega: T,
}

impl<T: Real> CbInputs<T> {
    pub fn from_moments(post_means: Vec<T>, post_vars: Vec<T>) -> Result<Self> {
        if post_means.len() != post_vars.len() {
            return Err(Error::DimensionMismatch {
                expected: post_means.len(),
                got: post_vars.len(),
                context: "posterior variances",
            });
        }
        let var_means = population_variance(&post_means);
        if var_means <= T::zero() {
            return Err(Error::DegenerateEnsemble);
        }
        let omega = (T::one() + mean(&post_vars) / var_means).sqrt();
        Ok(Self {
            post_means,
            post_vars,
            omega,
        })
    }

    pub fn from_draws(m: &PosteriorDrawMatrix<T>) -> Result<Self> {
        Self::from_moments(m.column_means(), m.column_variances())
    }

    /// `cb_i = mean + omega * (post_mean_i - mean)`: matches the ensemble
    /// mean of the posterior means exactly and inflates their spread so the
    /// ensemble variance equals `mean(post_vars) + var(post_means)`.
    pub fn estimate(&self) -> EnsembleEstimate<T> {
        let grand = mean(&self.post_means);
        let values: Vec<T> = self
            .post_means
            .iter()
            .map(|&mi| grand + self.omega * (mi - grand))
            .collect();
        EnsembleEstimate::new(Ensemble::new(values).unwrap(), EstimatorRule::Cb)
    }
}

/// Constrained-Bayes estimate from a draw matrix. Errors when the posterior
/// means are all equal (degenerate posteriors make the correction undefined).
pub fn cb_estimate<T: Real>(m: &PosteriorDrawMatrix<T>) -> Result<EnsembleEstimate<T>> {
    Ok(CbInputs::from_draws(m)?.estimate())
}

/// Rank-indexed WRSEL weights
/// `phi_i = exp(a1 * (i - (n+1)/2)) + exp(-a2 * (i - (n+1)/2))`, `i = 1..=n`.
///
/// Symmetric choices `a1 = a2` emphasise both extremes of the ensemble; the
/// weights are constant (all 2) when `a1 = a2 = 0`.
#[derive(Debug, Clone)]
pub struct WrselWeights<T> {
    pub a1: T,
    pub a2: T,
    pub phi: Vec<T>,
}

impl<T: Real> WrselWeights<T> {
    pub fn new(n: usize, a1: T, a2: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if a1 < T::zero() || a2 < T::zero() || !a1.is_finite() || !a2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "WRSEL weights require a1, a2 >= 0, got ({a1}, {a2})"
            )));
        }
        let mid = T::from_count(n + 1) * T::half();
        let phi = (1..=n)
            .map(|i| {
                let d = T::from_count(i) - mid;
                (a1 * d).exp() + (-(a2 * d)).exp()
            })
            .collect();
        Ok(Self { a1, a2, phi })
    }
}

/// WRSEL estimate: per unit, the ratio of Monte Carlo averages
/// `E[theta_i * phi_{R_i} | y] / E[phi_{R_i} | y]`, with the rank of unit `i`
/// recomputed within every joint draw.
pub fn wrsel_estimate<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    a1: T,
    a2: T,
) -> Result<EnsembleEstimate<T>> {
    let weights = WrselWeights::new(m.n_units(), a1, a2)?;
    let n = m.n_units();
    let mut num = vec![T::zero(); n];
    let mut den = vec![T::zero(); n];
    for row in m.rows() {
        let ranks = tied_max_ranks(row);
        for i in 0..n {
            let w = weights.phi[ranks[i] - 1];
            num[i] += row[i] * w;
            den[i] += w;
        }
    }
    let values: Vec<T> = num.iter().zip(&den).map(|(&a, &b)| a / b).collect();
    Ok(EnsembleEstimate::new(
        Ensemble::new(values)?,
        EstimatorRule::Wrsel {
            a1: a1.to_f64().unwrap(),
            a2: a2.to_f64().unwrap(),
        },
    ))
}

/// Triple-goal estimate.
///
/// Three stages: (i) the posterior EDF of the ensemble, which lives on the
/// pooled grid of all `S * n` draw values; (ii) posterior expected ranks
/// `Rbar_i = sum_j P(theta_i >= theta_j | y)`, integerised to a permutation
/// by ranking (ties by unit index); (iii) reading values off the inverse
/// posterior EDF at the rank-centred probabilities `(2 * Rhat_i - 1) / (2n)`.
pub fn gr_estimate<T: Real>(m: &PosteriorDrawMatrix<T>) -> Result<EnsembleEstimate<T>> {
    let n = m.n_units();
    let s = m.n_draws();

    // (ii) posterior expected ranks: the mean over draws of within-draw ranks
    let mut rank_sums = vec![T::zero(); n];
    for row in m.rows() {
        for (acc, r) in rank_sums.iter_mut().zip(tied_max_ranks(row)) {
            *acc += T::from_count(r);
        }
    }
    let sf = T::from_count(s);
    for acc in &mut rank_sums {
        *acc = *acc / sf;
    }
    let rhat = permutation_ranks(&rank_sums);

    // (i) + (iii) the posterior EDF assigns mass 1/(n*S) to every pooled draw
    // value, so its min-rule inverse is the type-1 quantile of the pool
    let mut pooled: Vec<T> = m.rows().flatten().copied().collect();
    pooled.sort_unstable_by(cmp_finite);
    let two_n = T::from_count(2 * n);
    let values: Vec<T> = rhat
        .iter()
        .map(|&r| {
            let target = T::from_count(2 * r - 1) / two_n;
            sorted_quantile(&pooled, target)
        })
        .collect();
    Ok(EnsembleEstimate::new(
        Ensemble::new(values)?,
        EstimatorRule::Gr,
    ))
}

/// Wraps externally supplied maximum-likelihood estimates, checking their
/// length against the draw matrix.
pub fn mle_passthrough<T: Real>(
    mle: Ensemble<T>,
    m: &PosteriorDrawMatrix<T>,
) -> Result<EnsembleEstimate<T>> {
    if mle.len() != m.n_units() {
        return Err(Error::DimensionMismatch {
            expected: m.n_units(),
            got: mle.len(),
            context: "MLE ensemble vs draw matrix",
        });
    }
    Ok(EnsembleEstimate::new(mle, EstimatorRule::Mle))
}
