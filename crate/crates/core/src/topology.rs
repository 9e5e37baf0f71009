//! Minimal spanning-tree topology and weight masking.
//!
//! Live edges are re-weighted so that strong, short links are cheap, a
//! minimum spanning tree is picked over them, and every other edge is zeroed
//! unless it still carries collision repulsion.

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connectivity::{ConnectivityError, ConnectivityState};
use crate::geometry::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("spanning tree of an empty team")]
    NoRobots,
    #[error("edge ({0}, {1}) is not a live pair of the state")]
    UnknownEdge(usize, usize),
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
}

/// Edge cost for tree selection: `-alpha * beta + d / d_com_max`.
pub fn mst_edge_weight(alpha: f64, beta: f64, d: f64, d_com_max: f64) -> f64 {
    -alpha * beta + d / d_com_max
}

/// Result of Kruskal's algorithm over a candidate edge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningForest {
    /// Chosen edges as `(i, j)` with `i < j`, in selection order.
    pub edges: Vec<(usize, usize)>,
    pub weights: Vec<f64>,
    /// The candidates did not connect every robot.
    pub partial: bool,
}

impl SpanningForest {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        self.edges.contains(&key)
    }
}

/// Kruskal's algorithm. Ties are broken by `(weight, i, j)` in that order,
/// so the result depends only on the candidate set.
pub fn kruskal_mst(candidates: &[(usize, usize, f64)], robots: usize) -> Result<SpanningForest, TopologyError> {
    if robots == 0 {
        return Err(TopologyError::NoRobots);
    }
    let mut sorted: Vec<(f64, usize, usize)> = candidates
        .iter()
        .filter(|(i, j, _)| i != j)
        .map(|&(i, j, w)| (w, i.min(j), i.max(j)))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut sets = UnionFind::<usize>::new(robots);
    let mut forest = SpanningForest {
        edges: Vec::with_capacity(robots - 1),
        weights: Vec::with_capacity(robots - 1),
        partial: false,
    };
    for (w, i, j) in sorted {
        if forest.edges.len() == robots - 1 {
            break;
        }
        if sets.union(i, j) {
            forest.edges.push((i, j));
            forest.weights.push(w);
        }
    }
    forest.partial = forest.edges.len() < robots - 1;
    Ok(forest)
}

/// Tree selection plus the masked weights it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologyPlan {
    pub tree: SpanningForest,
    pub masked_weights: DMatrix<f64>,
}

/// Candidate edges (positive current weight) with their tree-selection
/// costs.
pub fn candidate_edges(state: &ConnectivityState, d_com_max: f64) -> Vec<(usize, usize, f64)> {
    state
        .edges()
        .into_iter()
        .map(|(i, j)| {
            let f = state.factors(i, j);
            (i, j, mst_edge_weight(f.alpha, f.beta, f.distance, d_com_max))
        })
        .collect()
}

/// Applies the masking rules: tree edges keep their weight, any other pair
/// keeps only its collision factor when that factor is active.
pub fn mask_weights(state: &ConnectivityState, tree: &[(usize, usize)]) -> Result<DMatrix<f64>, TopologyError> {
    let n = state.robot_count();
    let mut in_tree = vec![false; n * n];
    for &(i, j) in tree {
        if i >= n || j >= n || i == j || state.weight(i, j) <= 0.0 {
            return Err(TopologyError::UnknownEdge(i, j));
        }
        in_tree[i * n + j] = true;
        in_tree[j * n + i] = true;
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if in_tree[i * n + j] {
            state.weight(i, j)
        } else {
            let gamma = state.factors(i, j).gamma;
            if gamma == 1.0 {
                0.0
            } else {
                gamma
            }
        }
    }))
}

/// The state rebuilt on masked weights, with gradients matching them: tree
/// edges keep the full product-rule gradient, masked-in safety pairs carry
/// the collision factor's gradient alone.
pub fn apply_mask(state: &ConnectivityState, tree: &[(usize, usize)]) -> Result<ConnectivityState, TopologyError> {
    let masked = mask_weights(state, tree)?;
    let n = state.robot_count();
    let mut grads = vec![Vec2::ZERO; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j || masked[(i, j)] == 0.0 {
                continue;
            }
            let key = (i.min(j), i.max(j));
            grads[i * n + j] = if tree.contains(&key) || tree.contains(&(key.1, key.0)) {
                state.grad(i, j)
            } else {
                state.pair_gradient(i, j).gamma
            };
        }
    }
    Ok(state.with_weights(masked, grads)?)
}

/// Picks the minimum spanning tree over the live edges of `state` and masks
/// the weights to it. A disconnected live graph yields a spanning forest.
pub fn plan_topology(state: &ConnectivityState, d_com_max: f64) -> Result<TopologyPlan, TopologyError> {
    let tree = kruskal_mst(&candidate_edges(state, d_com_max), state.robot_count())?;
    if tree.partial {
        tracing::debug!(edges = tree.edges.len(), "live graph disconnected, planning a forest");
    }
    let masked_weights = mask_weights(state, &tree.edges)?;
    Ok(TopologyPlan { tree, masked_weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_weight_examples() {
        assert_eq!(mst_edge_weight(1.0, 1.0, 5.0, 10.0), -0.5);
        assert_eq!(mst_edge_weight(0.0, 1.0, 12.0, 10.0), 1.2);
        assert_eq!(mst_edge_weight(1.0, 0.0, 3.0, 10.0), 0.3);
    }

    #[test]
    fn triangle_keeps_two_strongest() {
        let f = kruskal_mst(&[(0, 1, -0.9), (1, 2, -0.5), (0, 2, -0.1)], 3).unwrap();
        assert_eq!(f.edges, vec![(0, 1), (1, 2)]);
        assert!(!f.partial);
        assert!((f.total_weight() + 1.4).abs() < 1e-15);
    }

    #[test]
    fn ties_prefer_smaller_indices() {
        let edges = [(2, 3, 0.5), (1, 2, 0.5), (0, 3, 0.5), (0, 1, 0.5), (1, 3, 0.5), (0, 2, 0.5)];
        let f = kruskal_mst(&edges, 4).unwrap();
        assert_eq!(f.edges, vec![(0, 1), (0, 2), (0, 3)]);
        let mut reversed = edges;
        reversed.reverse();
        assert_eq!(kruskal_mst(&reversed, 4).unwrap(), f);
    }

    #[test]
    fn degenerate_team_sizes() {
        assert_eq!(kruskal_mst(&[], 0), Err(TopologyError::NoRobots));
        let single = kruskal_mst(&[], 1).unwrap();
        assert!(single.edges.is_empty() && !single.partial);
        let split = kruskal_mst(&[(0, 1, 0.1), (2, 3, 0.2)], 4).unwrap();
        assert!(split.partial);
        assert_eq!(split.edges.len(), 2);
    }
}
