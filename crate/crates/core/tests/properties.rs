//! Property tests for the spec'd invariants of the deterministic machinery.

use ed_core::classification::{optimal_rcl, rcl_regret, RankRule};
use ed_core::dispersion::{
    optimal_qr, posterior_qsel, qsel_regret, QselSpec,
};
use ed_core::estimators::{
    cb_estimate, gr_estimate, ssel_estimate, wrsel_estimate, EnsembleEstimate, EstimatorRule,
};
use ed_core::{Ensemble, PosteriorDrawMatrix};
use proptest::prelude::*;

fn finite_values(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, n)
}

fn positive_values(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..1e3f64, n)
}

fn draw_matrix(
    s_range: std::ops::RangeInclusive<usize>,
    n_range: std::ops::RangeInclusive<usize>,
    positive: bool,
) -> impl Strategy<Value = PosteriorDrawMatrix<f64>> {
    (s_range, n_range).prop_flat_map(move |(s, n)| {
        let cell = if positive {
            1e-3..1e3f64
        } else {
            -1e3..1e3f64
        };
        prop::collection::vec(cell, s * n)
            .prop_map(move |data| {
                let rows: Vec<Vec<f64>> = data.chunks(n).map(|c| c.to_vec()).collect();
                PosteriorDrawMatrix::from_rows(rows).unwrap()
            })
    })
}

proptest! {
    // Quantile monotonicity: p <= p' implies Q(p) <= Q(p')
    #[test]
    fn quantile_monotone(values in finite_values(1..=40), p in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let e = Ensemble::new(values).unwrap();
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(e.quantile(lo).unwrap() <= e.quantile(hi).unwrap());
    }

    // Quantile equivariance under monotone maps: Q(h(x), p) = h(Q(x, p))
    #[test]
    fn quantile_log_equivariant(values in positive_values(1..=40), p in 0.0..=1.0f64) {
        let e = Ensemble::new(values).unwrap();
        let logged = e.map(|v| v.ln()).unwrap();
        let lhs = logged.quantile(p).unwrap();
        let rhs = e.quantile(p).unwrap().ln();
        prop_assert_eq!(lhs, rhs);
    }

    // Rank/percentile consistency and order preservation
    #[test]
    fn ranks_consistent(values in finite_values(1..=40)) {
        let e = Ensemble::new(values.clone()).unwrap();
        let r = e.ranks();
        let n = values.len();
        for (&rank, &pct) in r.ranks().iter().zip(r.percentiles()) {
            prop_assert!(rank >= 1 && rank <= n);
            prop_assert_eq!(pct, rank as f64 / (n + 1) as f64);
        }
        // sorting values sorts ranks identically
        for i in 0..n {
            for j in 0..n {
                if values[i] < values[j] {
                    prop_assert!(r.ranks()[i] < r.ranks()[j]);
                } else if values[i] == values[j] {
                    prop_assert_eq!(r.ranks()[i], r.ranks()[j]);
                }
            }
        }
    }

    // QR on positive ensembles equals exp(IQR of the logs)
    #[test]
    fn qr_is_exp_log_iqr(values in positive_values(1..=40)) {
        let e = Ensemble::new(values).unwrap();
        let qr = e.qr().unwrap();
        let log_iqr = e.map(|v| v.ln()).unwrap().iqr();
        prop_assert!((qr - log_iqr.exp()).abs() <= 1e-9 * qr.abs().max(1.0));
    }

    // WRSEL reduces to SSEL for constant weights
    #[test]
    fn wrsel_constant_weights_is_ssel(m in draw_matrix(1..=12, 1..=8, false)) {
        let w = wrsel_estimate(&m, 0.0, 0.0).unwrap();
        let s = ssel_estimate(&m);
        for (a, b) in w.values().iter().zip(s.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    // Q-SEL regret of any candidate is non-negative (shared draw set)
    #[test]
    fn qsel_regret_nonnegative(
        (m, cand) in draw_matrix(1..=10, 2..=8, false).prop_flat_map(|m| {
            let n = m.n_units();
            (Just(m), prop::collection::vec(-1e3..1e3f64, n))
        })
    ) {
        let spec = QselSpec::quartiles();
        let candidate = EnsembleEstimate::new(Ensemble::new(cand).unwrap(), EstimatorRule::Mle);
        let rep = qsel_regret(&m, &spec, &candidate).unwrap();
        prop_assert!(rep.regret >= 0.0);
        prop_assert!(rep.candidate_loss + 1e-12 >= rep.optimal_loss);
    }

    // The Q-SEL optimum beats nudged versions of itself
    #[test]
    fn qsel_optimum_is_local_min(m in draw_matrix(1..=10, 2..=8, false), eps in 1e-6..1.0f64) {
        let spec = QselSpec::quartiles();
        let opt = ed_core::dispersion::optimal_qsel_estimator(&m, &spec);
        let base = posterior_qsel(&m, &spec, &opt.values).unwrap();
        for j in 0..opt.values.len() {
            for sign in [-1.0, 1.0] {
                let mut nudged = opt.values.clone();
                nudged[j] += sign * eps;
                let loss = posterior_qsel(&m, &spec, &nudged).unwrap();
                prop_assert!(loss >= base);
            }
        }
    }

    // Monotone-map invariance of the RCL machinery: strictly increasing
    // transforms leave the optimal rank classifier unchanged
    #[test]
    fn rcl_invariant_under_monotone_maps(m in draw_matrix(2..=10, 2..=8, true), gamma in 0.05..0.95f64) {
        let rule = RankRule::new(gamma).unwrap();
        let direct = optimal_rcl(&m, &rule);
        let mapped = m.map(|v| v.ln()).unwrap();
        let transformed = optimal_rcl(&mapped, &rule);
        prop_assert_eq!(direct.ranks(), transformed.ranks());
    }

    // CB and SSEL candidates produce identical RCL regrets (rank invariance)
    #[test]
    fn cb_ssel_identical_rcl_regret(m in draw_matrix(3..=10, 3..=8, false), gamma in 0.05..0.95f64) {
        let rule = RankRule::new(gamma).unwrap();
        let ssel = ssel_estimate(&m);
        if let Ok(cb) = cb_estimate(&m) {
            let a = rcl_regret(&m, &rule, &ssel).unwrap();
            let b = rcl_regret(&m, &rule, &cb).unwrap();
            prop_assert_eq!(a.candidate_loss, b.candidate_loss);
            prop_assert_eq!(a.regret, b.regret);
        }
    }

    // Optimal QR equals the Monte Carlo mean of exp(log-quartile spread)
    #[test]
    fn optimal_qr_log_route(m in draw_matrix(1..=10, 2..=8, true)) {
        let direct = optimal_qr(&m).unwrap();
        let via_logs = m
            .per_draw_map(|row| {
                let e = Ensemble::new(row.to_vec())?;
                Ok(e.map(|v| v.ln())?.iqr().exp())
            })
            .unwrap();
        let mean = via_logs.iter().sum::<f64>() / via_logs.len() as f64;
        prop_assert!((direct - mean).abs() <= 1e-9 * direct.abs().max(1.0));
    }
}

// SSEL is the quadratic minimizer: random perturbations never do better.
#[test]
fn ssel_beats_random_perturbations() {
    let posterior_ssel = |m: &PosteriorDrawMatrix<f64>, delta: &[f64]| -> f64 {
        let mut acc = 0.0;
        for row in m.rows() {
            for (v, d) in row.iter().zip(delta) {
                acc += (v - d) * (v - d);
            }
        }
        acc / m.n_draws() as f64
    };

    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 10_000) as f64 / 1_000.0 - 5.0
    };
    let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..5).map(|_| next()).collect()).collect();
    let m = PosteriorDrawMatrix::from_rows(rows).unwrap();
    let opt = ssel_estimate(&m);
    let base = posterior_ssel(&m, opt.values());
    for _ in 0..1000 {
        let perturbed: Vec<f64> = opt.values().iter().map(|v| v + next() * 0.1).collect();
        assert!(posterior_ssel(&m, &perturbed) >= base);
    }
}

// GR step (i): the posterior EDF minimizes the Monte Carlo averaged ISEL
// against shifted copies of itself.
#[test]
fn gr_posterior_edf_minimizes_isel_locally() {
    // exact ISEL between step functions via breakpoint integration
    fn isel(grid_a: &[f64], grid_b: &[f64]) -> f64 {
        let mut points: Vec<f64> = grid_a.iter().chain(grid_b).copied().collect();
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        let edf = |grid: &[f64], t: f64| -> f64 {
            grid.iter().filter(|&&g| g <= t).count() as f64 / grid.len() as f64
        };
        let mut acc = 0.0;
        for w in points.windows(2) {
            let d = edf(grid_a, w[0]) - edf(grid_b, w[0]);
            acc += d * d * (w[1] - w[0]);
        }
        acc
    }

    let rows = vec![
        vec![0.2, 1.4, 0.9],
        vec![1.1, 0.5, 2.0],
        vec![0.7, 1.9, 0.3],
        vec![1.5, 0.1, 1.2],
    ];
    let m = PosteriorDrawMatrix::from_rows(rows.clone()).unwrap();
    // the posterior EDF lives on the pooled grid
    let pooled: Vec<f64> = rows.iter().flatten().copied().collect();
    let mc_isel = |candidate: &[f64]| -> f64 {
        rows.iter().map(|row| isel(row, candidate)).sum::<f64>() / rows.len() as f64
    };
    let base = mc_isel(&pooled);
    for eps in [0.05, 0.2, 0.5] {
        for sign in [-1.0, 1.0] {
            let shifted: Vec<f64> = pooled.iter().map(|v| v + sign * eps).collect();
            assert!(
                mc_isel(&shifted) > base,
                "shifted EDF (eps {eps}) must lose to the posterior EDF"
            );
        }
    }
    // and the GR estimate itself stays within the pooled range
    let gr = gr_estimate(&m).unwrap();
    for v in gr.values() {
        assert!(*v >= 0.1 && *v <= 2.0);
    }
}

// CB moment identities at property scale: mean matches exactly, variance
// matches to relative 1e-10.
#[test]
fn cb_moment_identities() {
    let mut state = 42u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) % 10_000) as f64 / 1_000.0 - 5.0
    };
    for trial in 0..100 {
        let n = 2 + (trial % 7);
        let s = 2 + (trial % 13);
        let rows: Vec<Vec<f64>> = (0..s).map(|_| (0..n).map(|_| next()).collect()).collect();
        let m = PosteriorDrawMatrix::from_rows(rows).unwrap();
        let Ok(cb) = cb_estimate(&m) else { continue };
        let means = m.column_means();
        let vars = m.column_variances();
        let mean_of = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var_of = |v: &[f64]| {
            let mu = mean_of(v);
            v.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / v.len() as f64
        };
        let cb_mean = mean_of(cb.values());
        let target_mean = mean_of(&means);
        assert!(
            (cb_mean - target_mean).abs() <= 1e-12 * target_mean.abs().max(1.0),
            "trial {trial}: CB mean {cb_mean} vs {target_mean}"
        );
        let cb_var = var_of(cb.values());
        let target_var = mean_of(&vars) + var_of(&means);
        assert!(
            (cb_var - target_var).abs() <= 1e-10 * target_var.max(1.0),
            "trial {trial}: CB var {cb_var} vs {target_var}"
        );
        // rank invariance vs the posterior means
        let cb_ranks = Ensemble::new(cb.values().to_vec()).unwrap().ranks();
        let ssel_ranks = Ensemble::new(means).unwrap().ranks();
        assert_eq!(cb_ranks.ranks(), ssel_ranks.ranks());
    }
}
