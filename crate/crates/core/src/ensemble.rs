//! Deterministic primitives on finite ensembles and posterior draw matrices:
//! empirical distribution functions, type-1 quantiles, ranks, percentile
//! ranks, and the quartile ratio / interquartile range.
//!
//! The empirical quantile is the min-rule (type-1) quantile throughout:
//! `Q_n(p) = min{ v : F_n(v) >= p }`, with `p = 0` mapping to the minimum.
//! No interpolation is performed anywhere in this crate.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::{cmp_finite, Real};

/// A single realization of a parameter ensemble, or an ensemble of point
/// estimates: a finite real vector of length `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T> {
    values: Vec<T>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 1 by construction
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Applies a finite-valued transform to every entry.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Ensemble::new(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Type-1 empirical quantile: the smallest ensemble value whose EDF mass
    /// reaches `p`. `p = 0` returns the minimum, `p = 1` the maximum.
    pub fn quantile(&self, p: T) -> Result<T> {
        check_probability(p)?;
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(cmp_finite);
        Ok(sorted_quantile(&sorted, p))
    }

    /// Ranks under the indicator-sum definition `R_i = #{j : v_j <= v_i}`:
    /// the smallest value has rank 1, the largest rank `n`, and tied values
    /// share the larger rank. Percentile ranks are `R_i / (n + 1)`.
    pub fn ranks(&self) -> RankVector<T> {
        let ranks = tied_max_ranks(&self.values);
        RankVector::from_ranks(ranks)
    }

    /// Ranks forced to a permutation of `1..=n`, ties broken by ascending
    /// unit index. Used where a bijective rank assignment is required.
    pub fn permutation_ranks(&self) -> RankVector<T> {
        let ranks = permutation_ranks(&self.values);
        RankVector::from_ranks(ranks)
    }

    /// Empirical quartile ratio `Q(.75) / Q(.25)`.
    ///
    /// Errors when the first quartile is zero. For ensembles mixing signs the
    /// ratio is well-defined but scale-meaningless; dispatch to [`Self::iqr`]
    /// instead (the posterior losses in [`crate::dispersion`] enforce this).
    pub fn qr(&self) -> Result<T> {
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(cmp_finite);
        sorted_qr(&sorted)
    }

    /// Empirical interquartile range `Q(.75) - Q(.25)`.
    pub fn iqr(&self) -> T {
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(cmp_finite);
        sorted_iqr(&sorted)
    }

    /// Empirical mean.
    pub fn mean(&self) -> T {
        crate::scalar::mean(&self.values)
    }

    /// Population standard deviation (denominator `n`).
    pub fn sd(&self) -> T {
        crate::scalar::population_variance(&self.values).sqrt()
    }
}

/// `S` joint draws of an `n`-vector parameter ensemble: one row per draw,
/// one column per unit. The sole input to the loss and estimator machinery.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDrawMatrix<T> {
    draws: Vec<T>, // row-major, S * n
    n_draws: usize,
    n_units: usize,
    unit_ids: Vec<String>,
}

impl<T: Real> PosteriorDrawMatrix<T> {
    /// Builds a matrix from row-major data. `unit_ids` must be unique and of
    /// length `n_units`; all entries must be finite.
    pub fn new(draws: Vec<T>, n_draws: usize, n_units: usize, unit_ids: Vec<String>) -> Result<Self> {
        if n_draws == 0 || n_units == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if draws.len() != n_draws * n_units {
            return Err(Error::DimensionMismatch {
                expected: n_draws * n_units,
                got: draws.len(),
                context: "draw matrix storage",
            });
        }
        if unit_ids.len() != n_units {
            return Err(Error::DimensionMismatch {
                expected: n_units,
                got: unit_ids.len(),
                context: "unit ids",
            });
        }
        let mut seen = HashSet::new();
        for id in &unit_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateUnitId(id.clone()));
            }
        }
        if let Some(i) = draws.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            draws,
            n_draws,
            n_units,
            unit_ids,
        })
    }

    /// Builds a matrix from rows, numbering units `1..=n`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n_draws = rows.len();
        let n_units = rows.first().map_or(0, Vec::len);
        let mut draws = Vec::with_capacity(n_draws * n_units);
        for row in &rows {
            if row.len() != n_units {
                return Err(Error::DimensionMismatch {
                    expected: n_units,
                    got: row.len(),
                    context: "ragged draw row",
                });
            }
            draws.extend_from_slice(row);
        }
        let unit_ids = (1..=n_units).map(|i| i.to_string()).collect();
        Self::new(draws, n_draws, n_units, unit_ids)
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    /// One joint draw of the ensemble.
    pub fn row(&self, s: usize) -> &[T] {
        &self.draws[s * self.n_units..(s + 1) * self.n_units]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.draws.chunks_exact(self.n_units)
    }

    /// The draws for a single unit, in iteration order.
    pub fn column(&self, unit: usize) -> Vec<T> {
        (0..self.n_draws).map(|s| self.draws[s * self.n_units + unit]).collect()
    }

    /// Row-wise evaluation of an ensemble functional; element `s` of the
    /// output is `f(row s)`. Errors from `f` are tagged with the draw index.
    pub fn per_draw_map<F>(&self, f: F) -> Result<Vec<T>>
    where
        F: Fn(&[T]) -> Result<T>,
    {
        let mut out = Vec::with_capacity(self.n_draws);
        for (s, row) in self.rows().enumerate() {
            out.push(f(row).map_err(|e| Error::AtDraw {
                draw: s,
                source: Box::new(e),
            })?);
        }
        Ok(out)
    }

    /// Replaces the unit ids, keeping the draws.
    pub fn with_unit_ids(self, unit_ids: Vec<String>) -> Result<Self> {
        Self::new(self.draws, self.n_draws, self.n_units, unit_ids)
    }

    /// Applies a finite-valued transform to every draw, keeping unit ids.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.draws.iter().map(|&v| f(v)).collect(),
            self.n_draws,
            self.n_units,
            self.unit_ids.clone(),
        )
    }

    /// Per-unit posterior quantile: the type-1 `q`-quantile of each column.
    pub fn column_quantiles(&self, q: T) -> Result<Vec<T>> {
        check_probability(q)?;
        let mut out = Vec::with_capacity(self.n_units);
        let mut buf = vec![T::zero(); self.n_draws];
        for unit in 0..self.n_units {
            for (slot, row) in buf.iter_mut().zip(self.rows()) {
                *slot = row[unit];
            }
            buf.sort_unstable_by(cmp_finite);
            out.push(sorted_quantile(&buf, q));
        }
        Ok(out)
    }

    /// Per-unit posterior means.
    pub fn column_means(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_units];
        for row in self.rows() {
            for (acc, &v) in out.iter_mut().zip(row) {
                *acc += v;
            }
        }
        let s = T::from_count(self.n_draws);
        for acc in &mut out {
            *acc = *acc / s;
        }
        out
    }

    /// Per-unit posterior variances with Monte Carlo denominator `S`.
    pub fn column_variances(&self) -> Vec<T> {
        let means = self.column_means();
        let mut out = vec![T::zero(); self.n_units];
        for row in self.rows() {
            for ((acc, &v), &m) in out.iter_mut().zip(row).zip(&means) {
                let d = v - m;
                *acc += d * d;
            }
        }
        let s = T::from_count(self.n_draws);
        for acc in &mut out {
            *acc = *acc / s;
        }
        out
    }
}

/// Integer ranks paired with their percentile ranks `R_i / (n + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector<T> {
    ranks: Vec<usize>,
    percentiles: Vec<T>,
}

impl<T: Real> RankVector<T> {
    pub(crate) fn from_ranks(ranks: Vec<usize>) -> Self {
        let denom = T::from_count(ranks.len() + 1);
        let percentiles = ranks.iter().map(|&r| T::from_count(r) / denom).collect();
        Self { ranks, percentiles }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn percentiles(&self) -> &[T] {
        &self.percentiles
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Probabilities paired with the quantile values estimated for them.
/// `probs` is strictly increasing and `values` non-decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSet<T> {
    pub probs: Vec<T>,
    pub values: Vec<T>,
}

pub(crate) fn check_probability<T: Real>(p: T) -> Result<()> {
    if p < T::zero() || p > T::one() || !p.is_finite() {
        return Err(Error::InvalidProbability(p.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// Type-1 quantile of an ascending-sorted non-empty slice.
///
/// Picks the smallest index `k` (1-based) with `k/n >= p`. The candidate from
/// `ceil(n*p)` is corrected by direct EDF comparison so that boundary cases
/// like `p = 0.2, n = 10` are exact despite `n*p` rounding.
pub(crate) fn sorted_quantile<T: Real>(sorted: &[T], p: T) -> T {
    let n = sorted.len();
    let nf = T::from_count(n);
    let mut k = (nf * p).ceil().to_usize().unwrap_or(n).clamp(1, n);
    while k > 1 && T::from_count(k - 1) / nf >= p {
        k -= 1;
    }
    while k < n && T::from_count(k) / nf < p {
        k += 1;
    }
    sorted[k - 1]
}

pub(crate) fn sorted_qr<T: Real>(sorted: &[T]) -> Result<T> {
    let q1 = sorted_quantile(sorted, T::from_f64(0.25).unwrap());
    let q3 = sorted_quantile(sorted, T::from_f64(0.75).unwrap());
    if q1 == T::zero() {
        return Err(Error::ZeroFirstQuartile);
    }
    Ok(q3 / q1)
}

pub(crate) fn sorted_iqr<T: Real>(sorted: &[T]) -> T {
    let q1 = sorted_quantile(sorted, T::from_f64(0.25).unwrap());
    let q3 = sorted_quantile(sorted, T::from_f64(0.75).unwrap());
    q3 - q1
}

/// Indicator-sum ranks: `R_i = #{j : v_j <= v_i}`, ties sharing the larger
/// rank.
pub(crate) fn tied_max_ranks<T: Real>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| cmp_finite(&values[a], &values[b]));
    let mut ranks = vec![0usize; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        for &idx in &order[start..end] {
            ranks[idx] = end; // count of values <= this one
        }
        start = end;
    }
    ranks
}

/// Bijective ranks `1..=n`, ties broken by ascending original index.
pub(crate) fn permutation_ranks<T: Real>(values: &[T]) -> Vec<usize> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_finite(&values[a], &values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}
