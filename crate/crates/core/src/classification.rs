//! Threshold and rank classification of ensemble elements: realized losses,
//! posterior expected losses via the dot-product shortcut, optimal
//! classifiers, Bayesian true positive / true negative rates, and plug-in
//! regrets.
//!
//! "Above" always means strictly greater than the cut-off; draws exactly
//! equal to a threshold count as below. Exceedance probabilities are
//! estimated as draw frequencies, computed once per (matrix, rule) in
//! [`ClassificationProbabilities`] and reusable across candidates.

use crate::ensemble::{permutation_ranks, tied_max_ranks, Ensemble, PosteriorDrawMatrix, RankVector};
use crate::error::{Error, Result};
use crate::estimators::{posterior_quantile_estimate, EnsembleEstimate};
use crate::dispersion::LossReport;
use crate::scalar::Real;

/// Cut-off on the parameter scale plus misclassification weights.
///
/// The weighted rule penalises a false positive by `p` and a false negative
/// by `1 - p`; the unweighted rule uses weights `1/1` (twice the `p = 0.5`
/// rule, so a fully misclassified ensemble scores 1.0).
///
/// For cut-offs below the null value the positive class may be inverted
/// (`below` becomes the reportable direction); this swaps the roles of false
/// positives and false negatives and is explicit rather than auto-detected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRule<T> {
    cutoff: T,
    fp_weight: T,
    fn_weight: T,
    inverted: bool,
}

impl<T: Real> ThresholdRule<T> {
    /// Unweighted classification: weights `1/1`.
    pub fn unweighted(cutoff: T) -> Self {
        Self {
            cutoff,
            fp_weight: T::one(),
            fn_weight: T::one(),
            inverted: false,
        }
    }

    /// `p`-weighted classification, `0 <= p <= 1`.
    pub fn weighted(cutoff: T, p: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&p) || !p.is_finite() {
            return Err(Error::InvalidProbability(p.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self {
            cutoff,
            fp_weight: p,
            fn_weight: T::one() - p,
            inverted: false,
        })
    }

    pub fn inverted(mut self, inverted: bool) -> Self {
        self.inverted = inverted;
        self
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    /// Normalized false-positive weight in `[0, 1]`.
    pub fn fp_fraction(&self) -> T {
        self.fp_weight / (self.fp_weight + self.fn_weight)
    }

    /// Whether a value belongs to the positive class under this rule.
    fn positive(&self, v: T) -> bool {
        if self.inverted {
            v <= self.cutoff
        } else {
            v > self.cutoff
        }
    }
}

/// Percentile-rank cut-off `gamma` in `(0, 1)` for rank classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRule<T> {
    gamma: T,
}

impl<T: Real> RankRule<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if gamma <= T::zero() || gamma >= T::one() || !gamma.is_finite() {
            return Err(Error::InvalidProbability(gamma.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
}

/// Per-unit posterior classification probabilities, estimated as draw
/// frequencies: `above_i + below_i = 1`.
#[derive(Debug, Clone)]
pub struct ClassificationProbabilities<T> {
    pub above: Vec<T>,
    pub below: Vec<T>,
}

impl<T: Real> ClassificationProbabilities<T> {
    /// `P[theta_i > C | y]` per unit (strictly above; equality counts below).
    pub fn threshold(m: &PosteriorDrawMatrix<T>, rule: &ThresholdRule<T>) -> Self {
        let n = m.n_units();
        let mut counts = vec![0usize; n];
        for row in m.rows() {
            for (c, &v) in counts.iter_mut().zip(row) {
                if v > rule.cutoff {
                    *c += 1;
                }
            }
        }
        Self::from_counts(&counts, m.n_draws())
    }

    /// `P[P_i(theta) > gamma | y]` per unit, with percentile ranks recomputed
    /// within every joint draw.
    pub fn rank(m: &PosteriorDrawMatrix<T>, rule: &RankRule<T>) -> Self {
        let n = m.n_units();
        let denom = T::from_count(n + 1);
        let mut counts = vec![0usize; n];
        for row in m.rows() {
            let ranks = tied_max_ranks(row);
            for (c, r) in counts.iter_mut().zip(ranks) {
                if T::from_count(r) / denom > rule.gamma {
                    *c += 1;
                }
            }
        }
        Self::from_counts(&counts, m.n_draws())
    }

    fn from_counts(counts: &[usize], n_draws: usize) -> Self {
        let s = T::from_count(n_draws);
        let above: Vec<T> = counts.iter().map(|&c| T::from_count(c) / s).collect();
        let below = above.iter().map(|&a| T::one() - a).collect();
        Self { above, below }
    }

    pub fn len(&self) -> usize {
        self.above.len()
    }

    pub fn is_empty(&self) -> bool {
        self.above.is_empty()
    }
}

/// Realized threshold classification loss of a decision ensemble against a
/// known truth: the weighted average count of false positives and negatives.
pub fn tcl_realized<T: Real>(
    rule: &ThresholdRule<T>,
    truth: &Ensemble<T>,
    delta: &Ensemble<T>,
) -> Result<T> {
    if truth.len() != delta.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: delta.len(),
            context: "realized TCL inputs",
        });
    }
    let mut acc = T::zero();
    for (&t, &d) in truth.values().iter().zip(delta.values()) {
        let t_pos = rule.positive(t);
        let d_pos = rule.positive(d);
        if !t_pos && d_pos {
            acc += rule.fp_weight;
        } else if t_pos && !d_pos {
            acc += rule.fn_weight;
        }
    }
    Ok(acc / T::from_count(truth.len()))
}

/// Posterior expected TCL of a candidate ensemble, computed from cached
/// classification probabilities:
/// `(1/n) * (w_fp * <z_pos, p_neg> + w_fn * <z_neg, p_pos>)`.
pub fn posterior_expected_tcl_with<T: Real>(
    probs: &ClassificationProbabilities<T>,
    rule: &ThresholdRule<T>,
    delta: &[T],
) -> Result<T> {
    if delta.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: delta.len(),
            context: "posterior TCL candidate",
        });
    }
    // orient the cached above/below probabilities to the rule's positive class
    let (p_pos, p_neg) = if rule.inverted {
        (&probs.below, &probs.above)
    } else {
        (&probs.above, &probs.below)
    };
    let mut acc = T::zero();
    for ((&d, &pp), &pn) in delta.iter().zip(p_pos).zip(p_neg) {
        if rule.positive(d) {
            acc += rule.fp_weight * pn;
        } else {
            acc += rule.fn_weight * pp;
        }
    }
    Ok(acc / T::from_count(delta.len()))
}

/// Posterior expected TCL straight from a draw matrix.
pub fn posterior_expected_tcl<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &ThresholdRule<T>,
    delta: &Ensemble<T>,
) -> Result<T> {
    let probs = ClassificationProbabilities::threshold(m, rule);
    posterior_expected_tcl_with(&probs, rule, delta.values())
}

/// Minimizer of the posterior expected weighted TCL: the vector of per-unit
/// posterior quantiles at the weight-matched level (medians when
/// unweighted). Requires an interior false-positive fraction.
pub fn optimal_tcl<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &ThresholdRule<T>,
) -> Result<EnsembleEstimate<T>> {
    let p = rule.fp_fraction();
    if p <= T::zero() || p >= T::one() {
        return Err(Error::InvalidParameter(
            "weighted TCL with all weight on one error type has a degenerate minimizer; use an interior weight".into(),
        ));
    }
    let q = if rule.inverted { p } else { T::one() - p };
    posterior_quantile_estimate(m, q)
}

/// Realized rank classification loss: percentile ranks of the truth against
/// candidate percentile ranks, averaged false positives plus negatives.
pub fn rcl_realized<T: Real>(
    rule: &RankRule<T>,
    truth: &Ensemble<T>,
    delta_percentiles: &[T],
) -> Result<T> {
    if truth.len() != delta_percentiles.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: delta_percentiles.len(),
            context: "realized RCL inputs",
        });
    }
    check_percentiles(delta_percentiles)?;
    let g = rule.gamma;
    let truth_p = truth.ranks();
    let mut acc = T::zero();
    for (&p, &d) in truth_p.percentiles().iter().zip(delta_percentiles) {
        let fp = p <= g && d > g;
        let fn_ = p > g && d <= g;
        if fp || fn_ {
            acc += T::one();
        }
    }
    Ok(acc / T::from_count(truth.len()))
}

/// Minimizer of the posterior expected RCL: double-ranked exceedance
/// probabilities of the per-draw percentile ranks, ties broken by unit
/// index. The returned percentile ranks form a permutation of
/// `{1..n}/(n+1)`.
pub fn optimal_rcl<T: Real>(m: &PosteriorDrawMatrix<T>, rule: &RankRule<T>) -> RankVector<T> {
    let probs = ClassificationProbabilities::rank(m, rule);
    RankVector::from_ranks(permutation_ranks(&probs.above))
}

/// Posterior expected RCL of candidate percentile ranks, from cached rank
/// classification probabilities: `(2/n) * <z_below, p_above>`.
pub fn posterior_expected_rcl_with<T: Real>(
    probs: &ClassificationProbabilities<T>,
    rule: &RankRule<T>,
    delta_percentiles: &[T],
) -> Result<T> {
    if delta_percentiles.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: delta_percentiles.len(),
            context: "posterior RCL candidate",
        });
    }
    check_percentiles(delta_percentiles)?;
    let mut acc = T::zero();
    for (&d, &pa) in delta_percentiles.iter().zip(&probs.above) {
        if d <= rule.gamma {
            acc += pa;
        }
    }
    Ok(T::from_f64(2.0).unwrap() * acc / T::from_count(probs.len()))
}

/// Posterior expected RCL straight from a draw matrix.
pub fn posterior_expected_rcl<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &RankRule<T>,
    delta_percentiles: &[T],
) -> Result<T> {
    let probs = ClassificationProbabilities::rank(m, rule);
    posterior_expected_rcl_with(&probs, rule, delta_percentiles)
}

/// Posterior true positive and true negative rates of a classifier. A rate
/// is `None` when its denominator (the summed posterior mass of the
/// corresponding class) is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesRates<T> {
    pub tpr: Option<T>,
    pub tnr: Option<T>,
}

impl<T: Real> BayesRates<T> {
    pub fn fpr(&self) -> Option<T> {
        self.tnr.map(|t| T::one() - t)
    }

    pub fn fnr(&self) -> Option<T> {
        self.tpr.map(|t| T::one() - t)
    }
}

/// Bayesian sensitivity/specificity of a threshold classifier.
pub fn tcl_bayes_rates<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &ThresholdRule<T>,
    delta: &Ensemble<T>,
) -> Result<BayesRates<T>> {
    if delta.len() != m.n_units() {
        return Err(Error::DimensionMismatch {
            expected: m.n_units(),
            got: delta.len(),
            context: "TPR/TNR candidate",
        });
    }
    let probs = ClassificationProbabilities::threshold(m, rule);
    let (p_pos, p_neg) = if rule.inverted {
        (&probs.below, &probs.above)
    } else {
        (&probs.above, &probs.below)
    };
    let alloc_pos: Vec<bool> = delta.values().iter().map(|&d| rule.positive(d)).collect();
    Ok(rates_from(&alloc_pos, p_pos, p_neg))
}

/// Bayesian sensitivity/specificity of a percentile-rank classifier.
pub fn rcl_bayes_rates<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &RankRule<T>,
    delta_percentiles: &[T],
) -> Result<BayesRates<T>> {
    if delta_percentiles.len() != m.n_units() {
        return Err(Error::DimensionMismatch {
            expected: m.n_units(),
            got: delta_percentiles.len(),
            context: "rank TPR/TNR candidate",
        });
    }
    check_percentiles(delta_percentiles)?;
    let probs = ClassificationProbabilities::rank(m, rule);
    let alloc_pos: Vec<bool> = delta_percentiles.iter().map(|&d| d > rule.gamma).collect();
    Ok(rates_from(&alloc_pos, &probs.above, &probs.below))
}

fn rates_from<T: Real>(alloc_pos: &[bool], p_pos: &[T], p_neg: &[T]) -> BayesRates<T> {
    let mut tp = T::zero();
    let mut tn = T::zero();
    let mut pos_mass = T::zero();
    let mut neg_mass = T::zero();
    for ((&a, &pp), &pn) in alloc_pos.iter().zip(p_pos).zip(p_neg) {
        pos_mass += pp;
        neg_mass += pn;
        if a {
            tp += pp;
        } else {
            tn += pn;
        }
    }
    BayesRates {
        tpr: (pos_mass > T::zero()).then(|| tp / pos_mass),
        tnr: (neg_mass > T::zero()).then(|| tn / neg_mass),
    }
}

/// Regret of a candidate ensemble under the posterior expected TCL,
/// against the quantile-rule optimum. Optimal and candidate losses share one
/// probability cache, so the regret is non-negative by construction.
pub fn tcl_regret<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &ThresholdRule<T>,
    candidate: &EnsembleEstimate<T>,
) -> Result<LossReport<T>> {
    let probs = ClassificationProbabilities::threshold(m, rule);
    let optimal = optimal_tcl(m, rule)?;
    let optimal_loss = posterior_expected_tcl_with(&probs, rule, optimal.values())?;
    let candidate_loss = posterior_expected_tcl_with(&probs, rule, candidate.values())?;
    LossReport::from_losses(
        format!("TCL(C={})", rule.cutoff),
        optimal_loss,
        candidate_loss,
        candidate.rule(),
    )
}

/// Regret of a candidate ensemble under the posterior expected RCL. The
/// candidate's percentile ranks are recomputed from its values.
pub fn rcl_regret<T: Real>(
    m: &PosteriorDrawMatrix<T>,
    rule: &RankRule<T>,
    candidate: &EnsembleEstimate<T>,
) -> Result<LossReport<T>> {
    if candidate.len() != m.n_units() {
        return Err(Error::DimensionMismatch {
            expected: m.n_units(),
            got: candidate.len(),
            context: "RCL candidate vs draw matrix",
        });
    }
    let probs = ClassificationProbabilities::rank(m, rule);
    let optimal = optimal_rcl(m, rule);
    let optimal_loss = posterior_expected_rcl_with(&probs, rule, optimal.percentiles())?;
    let cand_percentiles = candidate.ensemble().ranks();
    let candidate_loss = posterior_expected_rcl_with(&probs, rule, cand_percentiles.percentiles())?;
    LossReport::from_losses(
        format!("RCL(gamma={})", rule.gamma),
        optimal_loss,
        candidate_loss,
        candidate.rule(),
    )
}

fn check_percentiles<T: Real>(percentiles: &[T]) -> Result<()> {
    for &p in percentiles {
        if p <= T::zero() || p >= T::one() || !p.is_finite() {
            return Err(Error::InvalidProbability(p.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorRule;
    use approx::assert_relative_eq;

    fn ens(v: &[f64]) -> Ensemble<f64> {
        Ensemble::new(v.to_vec()).unwrap()
    }

    fn matrix(rows: Vec<Vec<f64>>) -> PosteriorDrawMatrix<f64> {
        PosteriorDrawMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn realized_tcl_basics() {
        let rule = ThresholdRule::unweighted(0.0);
        let truth = ens(&[-1.0, 1.0]);
        assert_eq!(tcl_realized(&rule, &truth, &truth).unwrap(), 0.0);
        // every unit misclassified scores 1.0 under the 1/1 weights
        assert_eq!(tcl_realized(&rule, &truth, &ens(&[1.0, -1.0])).unwrap(), 1.0);

        let weighted = ThresholdRule::weighted(0.0, 0.8).unwrap();
        let loss = tcl_realized(&weighted, &ens(&[-1.0, 1.0]), &ens(&[1.0, -1.0])).unwrap();
        assert_relative_eq!(loss, 0.5, max_relative = 1e-15); // (0.8 + 0.2) / 2

        assert!(tcl_realized(&rule, &truth, &ens(&[1.0])).is_err());
    }

    #[test]
    fn realized_tcl_boundary_counts_below() {
        let rule = ThresholdRule::unweighted(1.0);
        // truth exactly at the cut-off is "below"; a decision above it is a FP
        let loss = tcl_realized(&rule, &ens(&[1.0]), &ens(&[2.0])).unwrap();
        assert_eq!(loss, 1.0);
    }

    #[test]
    fn posterior_tcl_formula_substitution() {
        // single unit with P(theta <= C) = 0.2, classified above:
        // contributes fp_weight * 0.2 / n
        let m = matrix(vec![vec![0.0], vec![2.0], vec![2.0], vec![2.0], vec![2.0]]);
        let rule = ThresholdRule::weighted(1.0, 0.8).unwrap();
        let loss = posterior_expected_tcl(&m, &rule, &ens(&[5.0])).unwrap();
        assert_relative_eq!(loss, 0.8 * 0.2, max_relative = 1e-15);

        // degenerate all-above matrix classified above contributes nothing
        let hi = matrix(vec![vec![3.0], vec![4.0]]);
        assert_eq!(posterior_expected_tcl(&hi, &rule, &ens(&[5.0])).unwrap(), 0.0);
    }

    #[test]
    fn optimal_tcl_is_quantile_rule() {
        let m = matrix(vec![
            vec![1.0, 10.0],
            vec![2.0, 20.0],
            vec![3.0, 30.0],
            vec![4.0, 40.0],
        ]);
        let med = optimal_tcl(&m, &ThresholdRule::unweighted(2.5)).unwrap();
        assert_eq!(med.values(), &[2.0, 20.0]);
        assert_eq!(med.rule(), EstimatorRule::Median);

        let q02 = optimal_tcl(&m, &ThresholdRule::weighted(2.5, 0.8).unwrap()).unwrap();
        assert_eq!(q02.values(), &[1.0, 10.0]);

        assert!(optimal_tcl(&m, &ThresholdRule::weighted(2.5, 1.0).unwrap()).is_err());
        assert!(optimal_tcl(&m, &ThresholdRule::weighted(2.5, 0.0).unwrap()).is_err());
    }

    #[test]
    fn optimal_tcl_allocation_matches_exceedance_rule() {
        // allocation above C iff P(theta_i > C | y) > p, for TCL_p
        let m = matrix(vec![
            vec![0.0, 0.0, 2.0],
            vec![0.0, 2.0, 2.0],
            vec![0.0, 2.0, 2.0],
            vec![2.0, 2.0, 2.0],
            vec![2.0, 2.0, 2.0],
        ]);
        let rule = ThresholdRule::weighted(1.0, 0.8).unwrap();
        let probs = ClassificationProbabilities::threshold(&m, &rule);
        let opt = optimal_tcl(&m, &rule).unwrap();
        for i in 0..3 {
            assert_eq!(opt.values()[i] > 1.0, probs.above[i] > 0.8, "unit {i}");
        }
    }

    #[test]
    fn optimal_tcl_attains_exhaustive_minimum() {
        let m = matrix(vec![
            vec![0.5, 1.4, 0.9],
            vec![1.2, 0.7, 1.1],
            vec![0.8, 1.6, 0.4],
            vec![1.9, 0.2, 1.3],
        ]);
        for &p in &[0.2, 0.5, 0.8] {
            let rule = ThresholdRule::weighted(1.0, p).unwrap();
            let probs = ClassificationProbabilities::threshold(&m, &rule);
            let opt = optimal_tcl(&m, &rule).unwrap();
            let opt_loss = posterior_expected_tcl_with(&probs, &rule, opt.values()).unwrap();
            let mut best = f64::INFINITY;
            for mask in 0..(1u32 << 3) {
                let delta: Vec<f64> = (0..3)
                    .map(|i| if mask & (1 << i) != 0 { 2.0 } else { 0.0 })
                    .collect();
                let loss = posterior_expected_tcl_with(&probs, &rule, &delta).unwrap();
                best = best.min(loss);
            }
            assert_eq!(opt_loss, best, "p = {p}");
        }
    }

    #[test]
    fn realized_rcl() {
        let rule = RankRule::new(0.5).unwrap();
        let truth = ens(&[1.0, 5.0]);
        let p = truth.ranks();
        assert_eq!(rcl_realized(&rule, &truth, p.percentiles()).unwrap(), 0.0);
        // swapped ranks: one FP and one FN
        let swapped = [p.percentiles()[1], p.percentiles()[0]];
        assert_eq!(rcl_realized(&rule, &truth, &swapped).unwrap(), 1.0);
    }

    #[test]
    fn optimal_rcl_single_unit() {
        let m = matrix(vec![vec![3.0]]);
        let rule = RankRule::new(0.8).unwrap();
        let opt = optimal_rcl(&m, &rule);
        assert_eq!(opt.percentiles(), &[0.5]);
        // hand formula: the single unit's percentile rank is always 1/2, so
        // the exceedance probability is 0 and any below-gamma allocation
        // scores (2/1) * 1 * 0 = 0
        let loss = posterior_expected_rcl(&m, &rule, opt.percentiles()).unwrap();
        assert_eq!(loss, 0.0);
        // with gamma below 1/2 the exceedance probability is 1 and a
        // below-gamma allocation pays the full 2 * p_above
        let low = RankRule::new(0.3).unwrap();
        let loss = posterior_expected_rcl(&m, &low, &[0.25]).unwrap();
        assert_eq!(loss, 2.0);
    }

    #[test]
    fn rcl_degenerate_truth_scores_zero() {
        let m = matrix(vec![vec![1.0, 3.0, 2.0]; 4]);
        let rule = RankRule::new(0.5).unwrap();
        let truth_p = ens(&[1.0, 3.0, 2.0]).ranks();
        assert_eq!(
            posterior_expected_rcl(&m, &rule, truth_p.percentiles()).unwrap(),
            0.0
        );
    }

    #[test]
    fn optimal_rcl_attains_subset_minimum() {
        let m = matrix(vec![
            vec![0.5, 1.4, 0.9, 2.0],
            vec![1.2, 0.7, 1.1, 0.1],
            vec![0.8, 1.6, 0.4, 1.5],
        ]);
        let n = 4;
        for &gamma in &[0.6, 0.8] {
            let rule = RankRule::new(gamma).unwrap();
            let probs = ClassificationProbabilities::rank(&m, &rule);
            let opt = optimal_rcl(&m, &rule);
            let opt_loss = posterior_expected_rcl_with(&probs, &rule, opt.percentiles()).unwrap();
            // enumerate all assignments of the permutation percentiles that
            // differ in which units sit above gamma
            let k = (1..=n).filter(|&r| r as f64 / (n + 1) as f64 > gamma).count();
            let mut best = f64::INFINITY;
            for mask in 0..(1u32 << n) {
                if (mask.count_ones() as usize) != k {
                    continue;
                }
                // top-k percentile values to the chosen subset, the rest below
                let mut delta = vec![0.0f64; n];
                let mut hi = n;
                let mut lo = 1;
                for (i, d) in delta.iter_mut().enumerate() {
                    if mask & (1 << i) != 0 {
                        *d = hi as f64 / (n + 1) as f64;
                        hi -= 1;
                    } else {
                        *d = lo as f64 / (n + 1) as f64;
                        lo += 1;
                    }
                }
                let loss = posterior_expected_rcl_with(&probs, &rule, &delta).unwrap();
                best = best.min(loss);
            }
            assert_eq!(opt_loss, best, "gamma = {gamma}");
        }
    }

    #[test]
    fn bayes_rates_identities() {
        let m = matrix(vec![vec![3.0, 0.5], vec![4.0, 1.5]]);
        let rule = ThresholdRule::unweighted(1.0);
        let delta = ens(&[5.0, 0.0]);
        let rates = tcl_bayes_rates(&m, &rule, &delta).unwrap();
        // unit 1 always above (mass 1), classified above; unit 2 above half
        // the time, classified below
        assert_relative_eq!(rates.tpr.unwrap(), 1.0 / 1.5, max_relative = 1e-15);
        assert_relative_eq!(rates.tnr.unwrap(), 0.5 / 0.5, max_relative = 1e-15);
        assert_eq!(rates.fpr().unwrap(), 1.0 - rates.tnr.unwrap());

        // decomposition: E[TCL] = (1/n) [FPR * sum P(<=C) + FNR * sum P(>C)]
        let probs = ClassificationProbabilities::threshold(&m, &rule);
        let e_tcl = posterior_expected_tcl_with(&probs, &rule, delta.values()).unwrap();
        let sum_above: f64 = probs.above.iter().sum();
        let sum_below: f64 = probs.below.iter().sum();
        let decomposed =
            (rates.fpr().unwrap() * sum_below + rates.fnr().unwrap() * sum_above) / 2.0;
        assert_relative_eq!(e_tcl, decomposed, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_all_above_tpr_one() {
        let m = matrix(vec![vec![3.0], vec![4.0]]);
        let rule = ThresholdRule::unweighted(1.0);
        let rates = tcl_bayes_rates(&m, &rule, &ens(&[9.0])).unwrap();
        assert_eq!(rates.tpr, Some(1.0));
        assert_eq!(rates.tnr, None); // no below mass: specificity undefined
    }

    #[test]
    fn tcl_regret_zero_for_optimal() {
        let m = matrix(vec![vec![1.0, 5.0], vec![2.0, 6.0], vec![3.0, 7.0]]);
        let rule = ThresholdRule::unweighted(4.0);
        let opt = optimal_tcl(&m, &rule).unwrap();
        let rep = tcl_regret(&m, &rule, &opt).unwrap();
        assert_eq!(rep.regret, 0.0);
    }

    #[test]
    fn rcl_fp_equals_fn_for_matching_rank_vectors() {
        // when truth and decision percentiles put the same number of units
        // above gamma, every false positive forces a false negative
        let rule = RankRule::new(0.5).unwrap();
        let truth = ens(&[3.0, 1.0, 4.0, 2.0]);
        let tp = truth.ranks();
        let delta = ens(&[1.0, 4.0, 2.0, 3.0]).ranks();
        let g = 0.5;
        let fp = tp
            .percentiles()
            .iter()
            .zip(delta.percentiles())
            .filter(|(&t, &d)| t <= g && d > g)
            .count();
        let fn_ = tp
            .percentiles()
            .iter()
            .zip(delta.percentiles())
            .filter(|(&t, &d)| t > g && d <= g)
            .count();
        assert_eq!(fp, fn_);
        let loss = rcl_realized(&rule, &truth, delta.percentiles()).unwrap();
        assert_eq!(loss, 2.0 * fp as f64 / 4.0);
    }

    #[test]
    fn realized_unweighted_tcl_on_lattice() {
        // unweighted realized TCL takes values in {0, 1/n, ..., 1}
        let rule = ThresholdRule::unweighted(0.0);
        let truth = ens(&[-1.0, 1.0, -2.0, 2.0, 0.5]);
        for delta in [
            ens(&[1.0, 1.0, 1.0, 1.0, 1.0]),
            ens(&[-1.0, -1.0, -1.0, -1.0, -1.0]),
            ens(&[1.0, -1.0, -2.0, 2.0, 0.5]),
        ] {
            let loss = tcl_realized(&rule, &truth, &delta).unwrap();
            let scaled = loss * 5.0;
            assert_eq!(scaled, scaled.round());
            assert!((0.0..=1.0).contains(&loss));
        }
    }

    #[test]
    fn inverted_rule_swaps_error_types() {
        let rule = ThresholdRule::weighted(1.0, 0.8).unwrap().inverted(true);
        // truth above cut-off, decision below: under inversion this is a FP
        let loss = tcl_realized(&rule, &ens(&[2.0]), &ens(&[0.5])).unwrap();
        assert_relative_eq!(loss, 0.8, max_relative = 1e-15);
        // unweighted losses are unaffected by inversion
        let u = ThresholdRule::unweighted(1.0);
        let ui = ThresholdRule::unweighted(1.0).inverted(true);
        let t = ens(&[2.0, 0.5, 1.2]);
        let d = ens(&[0.5, 2.0, 1.4]);
        assert_eq!(
            tcl_realized(&u, &t, &d).unwrap(),
            tcl_realized(&ui, &t, &d).unwrap()
        );
    }
}
