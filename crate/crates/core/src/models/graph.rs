//! Symmetric adjacency structure for the spatial models: two areas are
//! neighbours when they share a boundary.

use crate::error::{Error, Result};

/// Neighbour lists, 0-based internally. Symmetric and without self-loops by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    /// Validates symmetry and the absence of self-loops; neighbour lists are
    /// sorted and deduplicated.
    pub fn new(mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        for (i, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.contains(&i) {
                return Err(Error::InvalidGraph(format!("node {} lists itself", i + 1)));
            }
            if let Some(&j) = list.iter().find(|&&j| j >= n) {
                return Err(Error::InvalidGraph(format!(
                    "node {} lists out-of-range neighbour {}",
                    i + 1,
                    j + 1
                )));
            }
        }
        for i in 0..n {
            for &j in &neighbors[i] {
                if neighbors[j].binary_search(&i).is_err() {
                    return Err(Error::AsymmetricAdjacency(i + 1, j + 1));
                }
            }
        }
        Ok(Self { neighbors })
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n()).map(|i| self.degree(i)).min().unwrap_or(0)
    }

    /// Number of connected components (isolated nodes count).
    pub fn connected_components(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for &j in &self.neighbors[i] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        components
    }

    /// Pairwise-difference quadratic form of the intrinsic CAR prior:
    /// `sum_{i ~ j, i < j} (x_i - x_j)^2`.
    pub fn pairwise_difference_sum(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n() {
            for &j in &self.neighbors[i] {
                if j > i {
                    let d = x[i] - x[j];
                    acc += d * d;
                }
            }
        }
        acc
    }

    /// Nodes within `hops` edges of `start`, including `start` itself.
    pub fn ball(&self, start: usize, hops: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        dist[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut out = vec![start];
        while let Some(i) = queue.pop_front() {
            if dist[i] == hops {
                continue;
            }
            for &j in &self.neighbors[i] {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    out.push(j);
                    queue.push_back(j);
                }
            }
        }
        out
    }
}
