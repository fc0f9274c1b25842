//! Simple undirected, unweighted graph used by the curvature routines.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Sentinel hop count for nodes in a different component.
pub const UNREACHABLE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph on `n_nodes` nodes. Edges are normalised to `(min, max)`,
    /// de-duplicated and sorted; self-loops and out-of-range endpoints are rejected.
    pub fn new(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Invalid(format!("self-loop on node {a}")));
            }
            if a >= n_nodes || b >= n_nodes {
                return Err(Error::Invalid(format!(
                    "edge ({a}, {b}) out of range for {n_nodes} nodes"
                )));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(a, b) in &list {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(Self {
            adjacency,
            edges: list,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as sorted `(min, max)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbour list.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n_nodes() && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n_nodes() == 0 {
            return true;
        }
        hop_distances(self, 0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Errors unless `(u, v)` is an edge.
    pub(crate) fn check_edge(&self, u: usize, v: usize) -> Result<()> {
        if self.has_edge(u, v) {
            Ok(())
        } else {
            Err(Error::Invalid(format!("({u}, {v}) is not an edge")))
        }
    }
}

impl AsRef<Graph> for Graph {
    fn as_ref(&self) -> &Graph {
        self
    }
}

/// Breadth-first hop counts from `from`; [`UNREACHABLE`] outside its component.
pub fn hop_distances(g: &Graph, from: usize) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; g.n_nodes()];
    let mut queue = VecDeque::new();
    dist[from] = 0;
    queue.push_back(from);
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if dist[y] == UNREACHABLE {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// All-pairs hop counts, one BFS per node.
pub fn all_hop_distances(g: &Graph) -> Vec<Vec<usize>> {
    (0..g.n_nodes()).map(|v| hop_distances(g, v)).collect()
}
