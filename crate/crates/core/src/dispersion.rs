//! Posterior expected losses on ensemble quantiles and dispersion summaries
//! (Q-SEL, QR-SEL, IQR-SEL), their optimal estimators, the RoPQ/DoPQ
//! alternatives, and posterior-regret evaluation of plug-in ensembles.
//!
//! Optimal and candidate losses are always computed on the same draw
//! matrix, which makes every regret non-negative up to floating-point
//! rounding; tiny negative residuals are clamped to zero.

use crate::ensemble::{
    check_probability, sorted_iqr, sorted_qr, sorted_quantile, Ensemble, PosteriorDrawMatrix,
    QuantileSet,
};
use crate::error::{Error, Result};
use crate::estimators::{EnsembleEstimate, EstimatorRule};
use crate::scalar::{cmp_finite, mean, Real};

/// Probabilities scored by the quantiles squared error loss.
/// Strictly increasing, all within `(0, 1)`; defaults to the quartiles.
#[derive(Debug, Clone, PartialEq)]
pub struct QselSpec<T> {
    probs: Vec<T>,
}

impl<T: Real> QselSpec<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("Q-SEL needs at least one probability".into()));
        }
        for &p in &probs {
            check_probability(p)?;
            if p == T::zero() || p == T::one() {
                return Err(Error::InvalidProbability(p.to_f64().unwrap_or(f64::NAN)));
            }
        }
        if probs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "Q-SEL probabilities must be strictly increasing".into(),
            ));
        }
        Ok(Self { probs })
    }

    /// The quartile pair `{0.25, 0.75}`.
    pub fn quartiles() -> Self {
        Self {
            probs: vec![T::from_f64(0.25).unwrap(), T::from_f64(0.75).unwrap()],
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Posterior expected loss of a candidate alongside the optimal loss and the
/// absolute / percentage regret of using the candidate instead.
#[derive(Debug, Clone)]
pub struct LossReport<T> {
    pub loss_name: String,
    pub optimal_loss: T,
    pub candidate_loss: T,
    pub regret: T,
    pub percent_regret: T,
    pub rule: EstimatorRule,
}

impl<T: Real> LossReport<T> {
    /// Builds a report from losses computed on a shared draw set, clamping
    /// sub-tolerance negative regret (floating-point residue) to zero.
    pub(crate) fn from_losses(
        loss_name: impl Into<String>,
        optimal_loss: T,
        candidate_loss: T,
        rule: EstimatorRule,
    ) -> Result<Self> {
        let mut regret = candidate_loss - optimal_loss;
        if regret < T::zero() {
            let tol = T::from_f64(1e-9).unwrap() * optimal_loss.abs() + T::epsilon();
            if regret < -tol {
                return Err(Error::Numerical(format!(
                    "candidate loss {candidate_loss} fell below optimal loss {optimal_loss}"
                )));
            }
            regret = T::zero();
        }
        let percent_regret = if regret == T::zero() {
            T::zero()
        } else {
            T::from_f64(100.0).unwrap() * regret / optimal_loss
        };
        Ok(Self {
            loss_name: loss_name.into(),
            optimal_loss,
            candidate_loss,
            regret,
            percent_regret,
            rule,
        })
    }
}

/// Per-row type-1 quantiles at each probability of `spec`; row-major
/// `S x k` scratch used by the Q-SEL computations.
fn per_draw_quantiles<T: Real>(m: &PosteriorDrawMatrix<T>, spec: &QselSpec<T>) -> Vec<T> {
    let k = spec.len();
    let mut out = Vec::with_capacity(m.n_draws() * k);
    let mut buf = vec![T::zero(); m.n_units()];
    for row in m.rows() {
        buf.copy_from_slice(row);
        buf.sort_unstable_by(cmp_finite);
        for &p in spec.probs() {
            out.push(sorted_quantile(&buf, p));
        }
    }
    out
}

/// Monte Carlo posterior expected Q-SEL of the candidate quantile vector
/// `delta`: the average over draws of `sum_j (Q_row(p_j) - delta_j)^2`.
pub fn posterior_qsel<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    spec: &QselSpec<T>,
    delta: &[T],
) -> Result<T> {
    if delta.len() != spec.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.len(),
            got: delta.len(),
            context: "Q-SEL candidate vector",
        });
    }
    let k = spec.len();
    let rq = per_draw_quantiles(m, spec);
    let mut acc = T::zero();
    for row in rq.chunks_exact(k) {
        for (q, d) in row.iter().zip(delta) {
            let diff = *q - *d;
            acc += diff * diff;
        }
    }
    Ok(acc / T::from_count(m.n_draws()))
}

/// Minimizer of the posterior expected Q-SEL: component `j` is the posterior
/// mean of the per-draw empirical `p_j`-quantile.
pub fn optimal_qsel_estimator<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    spec: &QselSpec<T>,
) -> QuantileSet<T> {
    let k = spec.len();
    let rq = per_draw_quantiles(m, spec);
    let mut values = vec![T::zero(); k];
    for row in rq.chunks_exact(k) {
        for (acc, &q) in values.iter_mut().zip(row) {
            *acc += q;
        }
    }
    let s = T::from_count(m.n_draws());
    for acc in &mut values {
        *acc = *acc / s;
    }
    QuantileSet {
        probs: spec.probs().to_vec(),
        values,
    }
}

fn require_positive_draws<T: Real>(m: &PosteriorDrawMatrix<T>) -> Result<()> {
    if m.rows().flatten().any(|&v| v <= T::zero()) {
        return Err(Error::SignMixedDraws);
    }
    Ok(())
}

/// Posterior mean of the per-draw empirical quartile ratio: the minimizer of
/// the posterior expected QR-SEL. Refused unless every draw is positive;
/// sign-mixed ensembles should be scored with the IQR losses instead.
pub fn optimal_qr<T: Real>(m: &PosteriorDrawMatrix<T>) -> Result<T> {
    require_positive_draws(m)?;
    let per_row = per_draw_qr(m)?;
    Ok(mean(&per_row))
}

/// Posterior mean of the per-draw empirical interquartile range: the
/// minimizer of the posterior expected IQR-SEL.
pub fn optimal_iqr<T: Real>(m: &PosteriorDrawMatrix<T>) -> T {
    let per_row = per_draw_iqr(m);
    mean(&per_row)
}

fn per_draw_qr<T: Real>(m: &PosteriorDrawMatrix<T>) -> Result<Vec<T>> {
    let mut buf = vec![T::zero(); m.n_units()];
    let mut out = Vec::with_capacity(m.n_draws());
    for (s, row) in m.rows().enumerate() {
        buf.copy_from_slice(row);
        buf.sort_unstable_by(cmp_finite);
        out.push(sorted_qr(&buf).map_err(|e| Error::AtDraw {
            draw: s,
            source: Box::new(e),
        })?);
    }
    Ok(out)
}

fn per_draw_iqr<T: Real>(m: &PosteriorDrawMatrix<T>) -> Vec<T> {
    let mut buf = vec![T::zero(); m.n_units()];
    let mut out = Vec::with_capacity(m.n_draws());
    for row in m.rows() {
        buf.copy_from_slice(row);
        buf.sort_unstable_by(cmp_finite);
        out.push(sorted_iqr(&buf));
    }
    out
}

/// Ratio of posterior empirical quartiles: the ratio of the two optimal
/// Q-SEL components at `{0.25, 0.75}`. A plug-in alternative to
/// [`optimal_qr`]; the two differ by a Jensen gap in general.
pub fn ropq<T: Real>(m: &PosteriorDrawMatrix<T>) -> Result<T> {
    let q = optimal_qsel_estimator(m, &QselSpec::quartiles());
    if q.values[0] == T::zero() {
        return Err(Error::ZeroFirstQuartile);
    }
    Ok(q.values[1] / q.values[0])
}

/// Difference of posterior empirical quartiles: the IQR analogue of
/// [`ropq`].
pub fn dopq<T: Real>(m: &PosteriorDrawMatrix<T>) -> T {
    let q = optimal_qsel_estimator(m, &QselSpec::quartiles());
    q.values[1] - q.values[0]
}

/// Scores a candidate ensemble's empirical quantiles under the posterior
/// expected Q-SEL and reports its regret against the optimal estimator.
pub fn qsel_regret<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    spec: &QselSpec<T>,
    candidate: &EnsembleEstimate<T>,
) -> Result<LossReport<T>> {
    check_candidate_len(m, candidate)?;
    let mut sorted = candidate.values().to_vec();
    sorted.sort_unstable_by(cmp_finite);
    let delta: Vec<T> = spec.probs().iter().map(|&p| sorted_quantile(&sorted, p)).collect();
    let optimal = optimal_qsel_estimator(m, spec);
    let optimal_loss = posterior_qsel(m, spec, &optimal.values)?;
    let candidate_loss = posterior_qsel(m, spec, &delta)?;
    LossReport::from_losses(qsel_name(spec), optimal_loss, candidate_loss, candidate.rule())
}

/// Posterior expected Q-SEL of an arbitrary quantile vector, reported with
/// its regret. Used to score the RoPQ/DoPQ-style direct posterior summaries.
pub fn qsel_regret_of_values<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    spec: &QselSpec<T>,
    delta: &[T],
    rule: EstimatorRule,
) -> Result<LossReport<T>> {
    let optimal = optimal_qsel_estimator(m, spec);
    let optimal_loss = posterior_qsel(m, spec, &optimal.values)?;
    let candidate_loss = posterior_qsel(m, spec, delta)?;
    LossReport::from_losses(qsel_name(spec), optimal_loss, candidate_loss, rule)
}

/// Scores a candidate ensemble's empirical quartile ratio under the
/// posterior expected QR-SEL. Refused on sign-mixed draws.
pub fn qrsel_regret<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    candidate: &EnsembleEstimate<T>,
) -> Result<LossReport<T>> {
    check_candidate_len(m, candidate)?;
    let qr_cand = candidate.ensemble().qr()?;
    qrsel_regret_of_value(m, qr_cand, candidate.rule())
}

/// Posterior expected QR-SEL of a scalar QR candidate (e.g. the RoPQ).
pub fn qrsel_regret_of_value<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    qr_candidate: T,
    rule: EstimatorRule,
) -> Result<LossReport<T>> {
    require_positive_draws(m)?;
    let per_row = per_draw_qr(m)?;
    let optimal = mean(&per_row);
    let optimal_loss = quadratic_loss(&per_row, optimal);
    let candidate_loss = quadratic_loss(&per_row, qr_candidate);
    LossReport::from_losses("QR-SEL", optimal_loss, candidate_loss, rule)
}

/// Scores a candidate ensemble's empirical IQR under the posterior expected
/// IQR-SEL: the sign-agnostic replacement for the QR losses.
pub fn iqrsel_regret<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    candidate: &EnsembleEstimate<T>,
) -> Result<LossReport<T>> {
    check_candidate_len(m, candidate)?;
    iqrsel_regret_of_value(m, candidate.ensemble().iqr(), candidate.rule())
}

/// Posterior expected IQR-SEL of a scalar IQR candidate (e.g. the DoPQ).
pub fn iqrsel_regret_of_value<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    iqr_candidate: T,
    rule: EstimatorRule,
) -> Result<LossReport<T>> {
    let per_row = per_draw_iqr(m);
    let optimal = mean(&per_row);
    let optimal_loss = quadratic_loss(&per_row, optimal);
    let candidate_loss = quadratic_loss(&per_row, iqr_candidate);
    LossReport::from_losses("IQR-SEL", optimal_loss, candidate_loss, rule)
}

fn quadratic_loss<T: Real>(per_row: &[T], delta: T) -> T {
    let mut acc = T::zero();
    for &v in per_row {
        let d = v - delta;
        acc += d * d;
    }
    acc / T::from_count(per_row.len())
}

fn check_candidate_len<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    candidate: &EnsembleEstimate<T>,
) -> Result<()> {
    if candidate.len() != m.n_units() {
        return Err(Error::DimensionMismatch {
            expected: m.n_units(),
            got: candidate.len(),
            context: "candidate ensemble vs draw matrix",
        });
    }
    Ok(())
}

fn qsel_name<T: Real>(spec: &QselSpec<T>) -> String {
    let probs: Vec<String> = spec.probs().iter().map(|p| format!("{p}")).collect();
    format!("Q-SEL({})", probs.join(","))
}

/// Plug-in quantiles of an ensemble of point estimates, exposed for report
/// assembly.
pub fn plugin_quantiles<T: Real>(e: &Ensemble<T>, spec: &QselSpec<T>) -> QuantileSet<T> {
    let mut sorted = e.values().to_vec();
    sorted.sort_unstable_by(cmp_finite);
    QuantileSet {
        probs: spec.probs().to_vec(),
        values: spec.probs().iter().map(|&p| sorted_quantile(&sorted, p)).collect(),
    }
}
