//! Self-contained synthetic geometry: a square lattice standing in for a
//! real ward map, with expected counts drawn to mimic a registry's range.

use rand_distr::{Distribution, LogNormal};

use crate::error::Result;
use crate::models::{seeded_rng, AdjacencyGraph};

/// Centroid spacing of the shipped lattice. Chosen so that the default
/// Matern range (`phi = 3000`) yields a nearest-neighbour correlation around
/// 0.7, dropping below 0.25 at two hops: moderate-to-high dependence at the
/// mean neighbour distance and little beyond twice that.
pub const LATTICE_SPACING: f64 = 2.0e-4;

/// `k x k` rook-adjacency lattice.
pub fn lattice_graph(k: usize) -> Result<AdjacencyGraph> {
    let idx = |r: usize, c: usize| r * k + c;
    let mut neighbors = vec![Vec::new(); k * k];
    for r in 0..k {
        for c in 0..k {
            let i = idx(r, c);
            if r > 0 {
                neighbors[i].push(idx(r - 1, c));
            }
            if r + 1 < k {
                neighbors[i].push(idx(r + 1, c));
            }
            if c > 0 {
                neighbors[i].push(idx(r, c - 1));
            }
            if c + 1 < k {
                neighbors[i].push(idx(r, c + 1));
            }
        }
    }
    AdjacencyGraph::new(neighbors)
}

/// Cell centroids matching [`lattice_graph`], in row-major order.
pub fn lattice_centroids(k: usize, spacing: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(k * k);
    for r in 0..k {
        for c in 0..k {
            out.push((c as f64 * spacing, r as f64 * spacing));
        }
    }
    out
}

/// Synthetic expected counts: log-normal around ~40 cases, clamped to the
/// [8, 115] range of the registry table the harness imitates.
pub fn default_expected_counts(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed, 7);
    let dist = LogNormal::new(40.0f64.ln(), 0.45).expect("valid log-normal");
    (0..n).map(|_| dist.sample(&mut rng).clamp(8.0, 115.0)).collect()
}
