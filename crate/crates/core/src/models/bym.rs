//! Metropolis-within-Gibbs sampler for the BYM convolution model:
//! `y_i ~ Pois(E_i theta_i)` with `theta_i = exp(alpha + v_i + u_i)`,
//! iid effects `v_i ~ N(0, tau_v^2)`, an intrinsic CAR prior on the spatial
//! effects `u` (conditional mean = neighbour mean, variance `tau_u^2 / m_i`),
//! a flat prior on the intercept, and `Gam(0.5, 0.0005)` priors on both
//! precisions.
//!
//! The spatial effects are recentred to sum to zero after every sweep, with
//! the offset absorbed into the intercept.

use rand_distr::{Distribution, Gamma, Normal};

use super::pln::accept;
use super::{default_unit_ids, seeded_rng, AdjacencyGraph, McmcConfig, McmcDiagnostics};
use crate::ensemble::PosteriorDrawMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BymSpec {
    pub y: Vec<u64>,
    pub expected: Vec<f64>,
    pub graph: AdjacencyGraph,
    /// `(shape, rate)` of the gamma priors on `tau_v^{-2}` and `tau_u^{-2}`.
    pub precision_prior: (f64, f64),
    pub mcmc: McmcConfig,
}

impl BymSpec {
    pub fn new(y: Vec<u64>, expected: Vec<f64>, graph: AdjacencyGraph, mcmc: McmcConfig) -> Self {
        Self {
            y,
            expected,
            graph,
            precision_prior: (0.5, 0.0005),
            mcmc,
        }
    }

    fn validate(&self) -> Result<()> {
        self.mcmc.validate()?;
        if self.y.len() != self.graph.n() || self.expected.len() != self.graph.n() {
            return Err(Error::DimensionMismatch {
                expected: self.graph.n(),
                got: self.y.len().max(self.expected.len()),
                context: "BYM data vs graph",
            });
        }
        if self.graph.min_degree() == 0 {
            return Err(Error::InvalidGraph(
                "every area needs at least one neighbour for the CAR conditional".into(),
            ));
        }
        if let Some(i) = self.expected.iter().position(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected counts must be positive and finite, got {} at unit {}",
                self.expected[i],
                i + 1
            )));
        }
        if !(self.precision_prior.0 > 0.0 && self.precision_prior.1 > 0.0) {
            return Err(Error::InvalidParameter("hyperprior parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BymFit {
    pub draws: PosteriorDrawMatrix<f64>,
    pub diagnostics: McmcDiagnostics,
}

/// Full conditional of the CAR precision `tau_u^{-2}` under the
/// pairwise-difference form of the intrinsic prior:
/// `Gam(shape + (n - c)/2, rate + sum_{i~j}(u_i - u_j)^2 / 2)`, where `c` is
/// the number of connected components (`n - 1` degrees of freedom on a
/// connected map).
pub fn car_precision_full_conditional(
    prior: (f64, f64),
    graph: &AdjacencyGraph,
    u: &[f64],
) -> (f64, f64) {
    let (shape0, rate0) = prior;
    let rank = graph.n() - graph.connected_components();
    (
        shape0 + rank as f64 / 2.0,
        rate0 + graph.pairwise_difference_sum(u) / 2.0,
    )
}

/// Subtracts the mean, then pins the last element to the exact negation of
/// the running sum of the others so that the left-to-right total is zero in
/// floating point (`a + (-a)` is exact). Returns the absolute residual left
/// (zero on success).
fn recenter_exact(u: &mut [f64]) -> f64 {
    let n = u.len();
    let mean: f64 = u.iter().sum::<f64>() / n as f64;
    for x in u.iter_mut() {
        *x -= mean;
    }
    if n > 1 {
        let partial: f64 = u[..n - 1].iter().sum();
        u[n - 1] = -partial;
    }
    u.iter().sum::<f64>().abs()
}

pub fn bym_mcmc(spec: &BymSpec) -> Result<BymFit> {
    spec.validate()?;
    let n = spec.y.len();
    let y: Vec<f64> = spec.y.iter().map(|&c| c as f64).collect();
    let y_total: f64 = y.iter().sum();
    let e_total: f64 = spec.expected.iter().sum();

    let mut alpha = (y_total.max(0.5) / e_total).ln();
    let mut v: Vec<f64> = y
        .iter()
        .zip(&spec.expected)
        .map(|(&yi, &ei)| ((yi + 0.5) / (ei * alpha.exp())).ln())
        .collect();
    let mut u = vec![0.0f64; n];
    let mut prec_v = 1.0 / crate::scalar::population_variance(&v).max(1e-4);
    let mut prec_u = prec_v;

    let mut rng = seeded_rng(spec.mcmc.seed, 0);
    let step = Normal::new(0.0, spec.mcmc.proposal_sd).expect("validated proposal sd");
    // intercept block step scaled to its 1/sqrt(n) conditional width
    let alpha_step = Normal::new(0.0, spec.mcmc.proposal_sd / (n as f64).sqrt()).unwrap();

    let kept = spec.mcmc.kept();
    let mut draws = Vec::with_capacity(kept * n);
    let mut accept_v = 0usize;
    let mut accept_u = 0usize;
    let mut accept_alpha = 0usize;
    let mut max_abs_u_sum = 0.0f64;

    for sweep in 0..spec.mcmc.iters {
        // spatial effects against Poisson likelihood + CAR conditional
        for i in 0..n {
            let nbrs = spec.graph.neighbors(i);
            let m_i = nbrs.len() as f64;
            let nbr_mean = nbrs.iter().map(|&j| u[j]).sum::<f64>() / m_i;
            let cur = u[i];
            let prop = cur + step.sample(&mut rng);
            let eta = alpha + v[i];
            let delta = y[i] * (prop - cur)
                - spec.expected[i] * ((eta + prop).exp() - (eta + cur).exp())
                - 0.5 * prec_u * m_i * ((prop - nbr_mean).powi(2) - (cur - nbr_mean).powi(2));
            if accept(&mut rng, delta) {
                u[i] = prop;
                accept_u += 1;
            }
        }

        // iid effects
        for i in 0..n {
            let cur = v[i];
            let prop = cur + step.sample(&mut rng);
            let eta = alpha + u[i];
            let delta = y[i] * (prop - cur)
                - spec.expected[i] * ((eta + prop).exp() - (eta + cur).exp())
                - 0.5 * prec_v * (prop * prop - cur * cur);
            if accept(&mut rng, delta) {
                v[i] = prop;
                accept_v += 1;
            }
        }

        // flat-prior intercept: pure likelihood step
        let sum_evu: f64 = (0..n).map(|i| spec.expected[i] * (v[i] + u[i]).exp()).sum();
        let prop = alpha + alpha_step.sample(&mut rng);
        let delta = y_total * (prop - alpha) - (prop.exp() - alpha.exp()) * sum_evu;
        if accept(&mut rng, delta) {
            alpha = prop;
            accept_alpha += 1;
        }

        // exact Gibbs for both precisions
        let (shape_v, rate_v) =
            super::pln::iid_precision_full_conditional(spec.precision_prior, &v);
        prec_v = Gamma::new(shape_v, 1.0 / rate_v).unwrap().sample(&mut rng);
        let (shape_u, rate_u) =
            car_precision_full_conditional(spec.precision_prior, &spec.graph, &u);
        prec_u = Gamma::new(shape_u, 1.0 / rate_u).unwrap().sample(&mut rng);

        // sum-to-zero constraint, offset absorbed into the intercept
        let mean_u: f64 = u.iter().sum::<f64>() / n as f64;
        alpha += mean_u;
        let residual = recenter_exact(&mut u);
        max_abs_u_sum = max_abs_u_sum.max(residual);

        if sweep >= spec.mcmc.burnin {
            for i in 0..n {
                draws.push((alpha + v[i] + u[i]).exp());
            }
        }
    }

    let site_updates = (spec.mcmc.iters * n) as f64;
    Ok(BymFit {
        draws: PosteriorDrawMatrix::new(draws, kept, n, default_unit_ids(n))?,
        diagnostics: McmcDiagnostics {
            accept_v: accept_v as f64 / site_updates,
            accept_alpha: accept_alpha as f64 / spec.mcmc.iters as f64,
            accept_u: Some(accept_u as f64 / site_updates),
            max_abs_u_sum: Some(max_abs_u_sum),
        },
    })
}

/// Samples the intrinsic CAR prior alone (no likelihood) at a fixed variance
/// `tau_u_sq`. The prior is improper in its overall level, so no recentring
/// is applied here: the full conditionals `u_i | u_neighbours` are proper and
/// untouched, which is exactly what this sampler exists to expose. Returns
/// the kept `u` vectors.
pub fn car_prior_sample(
    graph: &AdjacencyGraph,
    tau_u_sq: f64,
    mcmc: &McmcConfig,
) -> Result<Vec<Vec<f64>>> {
    mcmc.validate()?;
    if !(tau_u_sq > 0.0) {
        return Err(Error::InvalidParameter("tau_u_sq must be positive".into()));
    }
    if graph.min_degree() == 0 {
        return Err(Error::InvalidGraph(
            "every area needs at least one neighbour for the CAR conditional".into(),
        ));
    }
    let n = graph.n();
    let prec = 1.0 / tau_u_sq;
    let mut u = vec![0.0f64; n];
    let mut rng = seeded_rng(mcmc.seed, 0);
    let step = Normal::new(0.0, mcmc.proposal_sd).unwrap();
    let mut kept = Vec::with_capacity(mcmc.kept());
    for sweep in 0..mcmc.iters {
        for i in 0..n {
            let nbrs = graph.neighbors(i);
            let m_i = nbrs.len() as f64;
            let nbr_mean = nbrs.iter().map(|&j| u[j]).sum::<f64>() / m_i;
            let cur = u[i];
            let prop = cur + step.sample(&mut rng);
            let delta =
                -0.5 * prec * m_i * ((prop - nbr_mean).powi(2) - (cur - nbr_mean).powi(2));
            if accept(&mut rng, delta) {
                u[i] = prop;
            }
        }
        if sweep >= mcmc.burnin {
            kept.push(u.clone());
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> AdjacencyGraph {
        AdjacencyGraph::new(vec![vec![1], vec![0, 2], vec![1]]).unwrap()
    }

    fn config(iters: usize, burnin: usize, seed: u64) -> McmcConfig {
        McmcConfig {
            iters,
            burnin,
            proposal_sd: 0.3,
            seed,
        }
    }

    #[test]
    fn car_full_conditional_on_path_graph() {
        let g = path3();
        let u = [1.0, 3.0, 0.0];
        let (shape, rate) = car_precision_full_conditional((0.5, 0.0005), &g, &u);
        assert_eq!(shape, 0.5 + 1.0); // (3 - 1) / 2
        assert_eq!(rate, 0.0005 + (4.0 + 9.0) / 2.0);
    }

    #[test]
    fn sum_to_zero_exact() {
        let mut u = vec![0.3, -1.7, 2.9, 0.11, -0.029];
        let residual = recenter_exact(&mut u);
        assert_eq!(residual, 0.0);
        assert_eq!(u.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn flat_surface_concentrates_near_one() {
        // y_i = E_i with large E: posterior RRs near 1
        let g = AdjacencyGraph::new(vec![
            vec![1, 2],
            vec![0, 3],
            vec![0, 3],
            vec![1, 2],
        ])
        .unwrap();
        let e = vec![2000.0; 4];
        let y = vec![2000u64; 4];
        let spec = BymSpec::new(y, e, g, config(3000, 1000, 3));
        let fit = bym_mcmc(&spec).unwrap();
        for m in fit.draws.column_means() {
            assert!((m - 1.0).abs() < 0.05, "posterior mean {m}");
        }
        assert_eq!(fit.diagnostics.max_abs_u_sum, Some(0.0));
    }

    #[test]
    fn seeded_replay_and_divergence() {
        let spec = BymSpec::new(
            vec![5, 9, 2],
            vec![4.0, 7.0, 3.0],
            path3(),
            config(300, 100, 21),
        );
        let a = bym_mcmc(&spec).unwrap();
        let b = bym_mcmc(&spec).unwrap();
        assert_eq!(a.draws, b.draws);
        let mut spec2 = spec.clone();
        spec2.mcmc.seed = 22;
        assert_ne!(bym_mcmc(&spec2).unwrap().draws, a.draws);
    }

    #[test]
    fn rejects_isolated_nodes() {
        let g = AdjacencyGraph::new(vec![vec![1], vec![0], vec![]]).unwrap();
        let spec = BymSpec::new(vec![1, 1, 1], vec![1.0, 1.0, 1.0], g, config(10, 2, 1));
        assert!(matches!(bym_mcmc(&spec), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn car_prior_conditional_mean_on_cycle() {
        // 4-cycle: E[u_0 | u_1, u_3] = (u_1 + u_3)/2; the regression slope of
        // u_0 on the neighbour mean should be close to 1
        let g = AdjacencyGraph::new(vec![vec![1, 3], vec![0, 2], vec![1, 3], vec![0, 2]]).unwrap();
        let cfg = McmcConfig {
            iters: 30_000,
            burnin: 2_000,
            proposal_sd: 0.8,
            seed: 5,
        };
        let kept = car_prior_sample(&g, 1.0, &cfg).unwrap();
        let (mut sxy, mut sxx, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
        let m = kept.len() as f64;
        for u in &kept {
            let x = (u[1] + u[3]) / 2.0;
            let yv = u[0];
            sxy += x * yv;
            sxx += x * x;
            sx += x;
            sy += yv;
        }
        let slope = (sxy - sx * sy / m) / (sxx - sx * sx / m);
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
    }
}
