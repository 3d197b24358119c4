//! The four spatial risk-surface scenarios: an isolated elevated cluster,
//! mixed clusters and singleton areas, a Matern-correlated surface, and a
//! covariate-driven surface. Counts come from a total-preserving
//! multinomial at the reference scaling or from Poisson scaling otherwise.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal, Poisson, StandardNormal};

use super::matern::{matern_cov, CholeskyFactor};
use super::{DatasetProvenance, SimulatedDataset};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::models::{seeded_rng, AdjacencyGraph};

/// Expected-count scaling factors exercised by the harness.
pub const SF_LEVELS: [f64; 3] = [0.1, 1.0, 2.0];

/// Default Matern smoothness and range for the correlated scenario.
pub const MATERN_NU: f64 = 40.0;
pub const MATERN_PHI: f64 = 3000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialKind {
    /// One isolated cluster of elevated risk (hardest case for smoothing).
    Sc1,
    /// Five buffered clusters plus five isolated elevated areas.
    Sc2,
    /// Log-risks drawn from a Matern-correlated multivariate normal.
    Sc3,
    /// Log-risks driven by a hidden covariate plus iid noise.
    Sc4,
}

impl std::fmt::Display for SpatialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpatialKind::Sc1 => write!(f, "sc1"),
            SpatialKind::Sc2 => write!(f, "sc2"),
            SpatialKind::Sc3 => write!(f, "sc3"),
            SpatialKind::Sc4 => write!(f, "sc4"),
        }
    }
}

/// Low / medium / high risk variability, mapped per scenario onto the level
/// of risk (SC1/SC2), the marginal log-risk scale (SC3), or the covariate
/// coefficient (SC4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariabilityLevel {
    Low,
    Med,
    High,
}

impl VariabilityLevel {
    pub fn risk_level(self) -> f64 {
        match self {
            VariabilityLevel::Low => 1.5,
            VariabilityLevel::Med => 2.0,
            VariabilityLevel::High => 3.0,
        }
    }

    pub fn sc3_sigma(self) -> f64 {
        match self {
            VariabilityLevel::Low => 0.1,
            VariabilityLevel::Med => 0.2,
            VariabilityLevel::High => 0.3,
        }
    }

    pub fn sc4_beta(self) -> f64 {
        match self {
            VariabilityLevel::Low => 0.2,
            VariabilityLevel::Med => 0.3,
            VariabilityLevel::High => 0.4,
        }
    }
}

impl std::fmt::Display for VariabilityLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VariabilityLevel::Low => write!(f, "low"),
            VariabilityLevel::Med => write!(f, "med"),
            VariabilityLevel::High => write!(f, "high"),
        }
    }
}

/// How observed counts are generated from the true risk surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountModel {
    /// Total-preserving: `sum(y) = round(sum(E) * SF)` exactly.
    Multinomial,
    /// Independent `Pois(theta_i E_i SF)`.
    Poisson,
}

#[derive(Debug, Clone)]
pub struct SpatialScenario {
    pub kind: SpatialKind,
    pub level: VariabilityLevel,
    pub sf: f64,
    pub graph: AdjacencyGraph,
    pub centroids: Vec<(f64, f64)>,
    pub expected: Vec<f64>,
    /// Per-area covariate for the hidden-covariate scenario; a synthetic
    /// standard-normal surface is drawn when absent.
    pub covariate: Option<Vec<f64>>,
    /// `None` picks the benchmark split: multinomial at `SF = 1`, Poisson
    /// otherwise.
    pub count_model: Option<CountModel>,
    /// Elevated-area risk for SC1/SC2 in place of the level mapping
    /// (`1.0` produces a null surface).
    pub risk_level_override: Option<f64>,
    pub matern_nu: f64,
    pub matern_phi: f64,
    pub seed: u64,
}

impl SpatialScenario {
    pub fn new(
        kind: SpatialKind,
        level: VariabilityLevel,
        sf: f64,
        graph: AdjacencyGraph,
        centroids: Vec<(f64, f64)>,
        expected: Vec<f64>,
        seed: u64,
    ) -> Self {
        Self {
            kind,
            level,
            sf,
            graph,
            centroids,
            expected,
            covariate: None,
            count_model: None,
            risk_level_override: None,
            matern_nu: MATERN_NU,
            matern_phi: MATERN_PHI,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        if self.expected.len() != n || self.centroids.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.expected.len().min(self.centroids.len()),
                context: "spatial scenario geometry",
            });
        }
        if let Some(cov) = &self.covariate {
            if cov.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: cov.len(),
                    context: "covariate vector",
                });
            }
        }
        if !(self.sf > 0.0) || !self.sf.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scaling factor must be positive, got {}",
                self.sf
            )));
        }
        if let Some(i) = self.expected.iter().position(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected counts must be positive, got {} at unit {}",
                self.expected[i],
                i + 1
            )));
        }
        Ok(())
    }

    fn effective_count_model(&self) -> CountModel {
        self.count_model.unwrap_or(if self.sf == 1.0 {
            CountModel::Multinomial
        } else {
            CountModel::Poisson
        })
    }
}

/// Generates one spatial dataset: the true risk surface per the scenario
/// procedure, then counts under the scenario's count model.
pub fn gen_spatial(sc: &SpatialScenario) -> Result<SimulatedDataset> {
    sc.validate()?;
    let mut rng = seeded_rng(sc.seed, 0);
    let theta = match sc.kind {
        SpatialKind::Sc1 => sc1_surface(sc, &mut rng)?,
        SpatialKind::Sc2 => sc2_surface(sc, &mut rng)?,
        SpatialKind::Sc3 => sc3_surface(sc, &mut rng)?,
        SpatialKind::Sc4 => sc4_surface(sc, &mut rng)?,
    };
    let y = match sc.effective_count_model() {
        CountModel::Multinomial => multinomial_counts(&theta, &sc.expected, sc.sf, sc.seed)?,
        CountModel::Poisson => poisson_counts(&theta, &sc.expected, sc.sf, sc.seed)?,
    };
    Ok(SimulatedDataset {
        theta_true: Ensemble::new(theta)?,
        scale: sc.expected.iter().map(|&e| e * sc.sf).collect(),
        y: y.into_iter().map(|c| c as f64).collect(),
        provenance: DatasetProvenance {
            label: format!("{}-{}-sf{}", sc.kind, sc.level, sc.sf),
            seed: sc.seed,
            replicate: 0,
        },
    })
}

/// Greedy cluster accretion from a random seed area: breadth-first over
/// current neighbours (ascending index) until the cluster's share of the
/// total expected counts reaches `target_share`, or the component is
/// exhausted. `banned` areas are never entered.
fn accrete_cluster<R: Rng>(
    rng: &mut R,
    graph: &AdjacencyGraph,
    expected: &[f64],
    target_share: f64,
    cap_share: f64,
    banned: &[bool],
) -> Option<Vec<usize>> {
    let total: f64 = expected.iter().sum();
    let allowed: Vec<usize> = (0..graph.n()).filter(|&i| !banned[i]).collect();
    let &seed_area = allowed.choose(rng)?;

    let mut cluster = vec![seed_area];
    let mut in_cluster = vec![false; graph.n()];
    in_cluster[seed_area] = true;
    let mut mass = expected[seed_area];
    let mut frontier: Vec<usize> = graph
        .neighbors(seed_area)
        .iter()
        .copied()
        .filter(|&j| !banned[j])
        .collect();
    frontier.sort_unstable();

    while mass < target_share * total {
        let next = frontier.iter().copied().find(|&j| !in_cluster[j])?;
        frontier.retain(|&j| j != next);
        in_cluster[next] = true;
        cluster.push(next);
        mass += expected[next];
        if mass > cap_share * total {
            return None; // overshot the admissible share; caller retries
        }
        let mut add: Vec<usize> = graph
            .neighbors(next)
            .iter()
            .copied()
            .filter(|&j| !banned[j] && !in_cluster[j] && !frontier.contains(&j))
            .collect();
        add.sort_unstable();
        frontier.extend(add);
    }
    Some(cluster)
}

fn elevated_surface(n: usize, elevated: &[usize], risk: f64) -> Vec<f64> {
    let mut theta = vec![1.0; n];
    for &i in elevated {
        theta[i] = risk;
    }
    theta
}

fn sc1_surface(sc: &SpatialScenario, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let risk = sc.risk_level_override.unwrap_or_else(|| sc.level.risk_level());
    let banned = vec![false; sc.graph.n()];
    for _ in 0..100 {
        if let Some(cluster) =
            accrete_cluster(rng, &sc.graph, &sc.expected, 0.05, 0.07, &banned)
        {
            return Ok(elevated_surface(sc.graph.n(), &cluster, risk));
        }
    }
    Err(Error::InfeasibleScenario(
        "could not grow a cluster holding ~5% of the expected counts in 100 attempts".into(),
    ))
}

fn sc2_surface(sc: &SpatialScenario, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let n = sc.graph.n();
    let mut banned = vec![false; n];
    let mut elevated = Vec::new();

    // five singleton areas at fixed percentiles of the expected counts
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        sc.expected[a]
            .partial_cmp(&sc.expected[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    for &p in &[0.10, 0.20, 0.50, 0.75, 0.90] {
        let target = order[((n as f64 * p).ceil() as usize).clamp(1, n) - 1];
        // walk outward in E-order if the percentile area conflicts with an
        // earlier selection's buffer
        let pos = order.iter().position(|&i| i == target).unwrap();
        let pick = (0..n)
            .flat_map(|d| {
                let mut c = Vec::new();
                if pos + d < n {
                    c.push(order[pos + d]);
                }
                if d > 0 && pos >= d {
                    c.push(order[pos - d]);
                }
                c
            })
            .find(|&i| !banned[i])
            .ok_or_else(|| {
                Error::InfeasibleScenario("no buffered area left for a singleton".into())
            })?;
        elevated.push(pick);
        for b in sc.graph.ball(pick, 2) {
            banned[b] = true;
        }
    }

    // five buffered clusters, each holding at most 5% of the expected counts
    for c in 0..5 {
        let mut placed = false;
        for _ in 0..100 {
            if let Some(cluster) =
                accrete_cluster(rng, &sc.graph, &sc.expected, 0.03, 0.05, &banned)
            {
                for &i in &cluster {
                    elevated.push(i);
                }
                for &i in &cluster {
                    for b in sc.graph.ball(i, 2) {
                        banned[b] = true;
                    }
                }
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::InfeasibleScenario(format!(
                "graph too small to host 5 buffered clusters (placed {c})"
            )));
        }
    }

    let risk = sc.risk_level_override.unwrap_or_else(|| sc.level.risk_level());
    Ok(elevated_surface(n, &elevated, risk))
}

fn sc3_surface(sc: &SpatialScenario, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let cov = matern_cov(&sc.centroids, sc.matern_nu, sc.matern_phi)?;
    let factor = CholeskyFactor::new(&cov)?;
    let log_theta = factor.sample(sc.level.sc3_sigma(), rng);
    Ok(log_theta.into_iter().map(f64::exp).collect())
}

fn sc4_surface(sc: &SpatialScenario, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let n = sc.graph.n();
    let covariate: Vec<f64> = match &sc.covariate {
        Some(c) => c.clone(),
        None => (0..n).map(|_| StandardNormal.sample(rng)).collect(),
    };
    let beta = sc.level.sc4_beta();
    let noise = Normal::new(0.0, 0.1).unwrap();
    Ok(covariate
        .iter()
        .map(|&c| (beta * c + noise.sample(rng)).exp())
        .collect())
}

/// Total-preserving counts: `N = round(sum(E) * SF)` trials distributed over
/// areas with probabilities proportional to `E_i * theta_i`, realized as a
/// chain of conditional binomials so the total is exact by construction.
pub fn multinomial_counts(theta: &[f64], expected: &[f64], sf: f64, seed: u64) -> Result<Vec<u64>> {
    check_count_inputs(theta, expected, sf)?;
    let mut rng = seeded_rng(seed, 1);
    let weights: Vec<f64> = theta.iter().zip(expected).map(|(&t, &e)| t * e).collect();
    let mut weight_left: f64 = weights.iter().sum();
    let total_e: f64 = expected.iter().sum();
    let mut trials_left = (total_e * sf).round() as u64;

    let mut out = Vec::with_capacity(theta.len());
    for (i, &w) in weights.iter().enumerate() {
        if i + 1 == weights.len() {
            out.push(trials_left);
            break;
        }
        let p = (w / weight_left).clamp(0.0, 1.0);
        let draw = Binomial::new(trials_left, p)
            .map_err(|e| Error::Numerical(format!("binomial: {e}")))?
            .sample(&mut rng);
        out.push(draw);
        trials_left -= draw;
        weight_left -= w;
    }
    Ok(out)
}

/// Independent Poisson counts at scaled expectations `theta_i * E_i * SF`.
pub fn poisson_counts(theta: &[f64], expected: &[f64], sf: f64, seed: u64) -> Result<Vec<u64>> {
    check_count_inputs(theta, expected, sf)?;
    let mut rng = seeded_rng(seed, 1);
    theta
        .iter()
        .zip(expected)
        .map(|(&t, &e)| {
            let lambda = t * e * sf;
            if lambda == 0.0 {
                return Ok(0);
            }
            Ok(Poisson::new(lambda)
                .map_err(|e| Error::Numerical(format!("poisson: {e}")))?
                .sample(&mut rng) as u64)
        })
        .collect()
}

fn check_count_inputs(theta: &[f64], expected: &[f64], sf: f64) -> Result<()> {
    if theta.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            got: expected.len(),
            context: "count generation inputs",
        });
    }
    if theta.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if theta.iter().any(|&t| !(t > 0.0)) || expected.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter(
            "count generation needs positive risks and expected counts".into(),
        ));
    }
    if !(sf > 0.0) || !sf.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid scaling factor {sf}")));
    }
    Ok(())
}

/// True elevated set of an SC1/SC2 surface (areas with risk above 1).
pub fn elevated_set(theta: &[f64]) -> Vec<usize> {
    theta
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 1.0)
        .map(|(i, _)| i)
        .collect()
}
