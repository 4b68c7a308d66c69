//! Finite stability combinatorics on graphs: half-graph detection, exact
//! rational regularity checks, regularity partitioning of stable graphs, and
//! homogeneous-set search.

mod generators;
mod halfgraph;
mod homogeneous;
mod ramsey;
mod regularity;

pub use generators::{complete_bipartite, complete_multipartite, gnp_half, half_graph, union_of_cliques};
pub use halfgraph::{find_half_graph, order_property, HalfGraphWitness};
pub use homogeneous::{max_homogeneous, max_homogeneous_with, HomogeneousReport, HomogeneousConfig};
pub use ramsey::{stable_ramsey_report, RamseyFamily, RamseyReport, RamseyRow};
pub use regularity::{
    edge_density, regular_pair_exact, regular_pair_sampled, stable_regularity, BalanceReport,
    Density, ExactVerdict, PairReport, PairVerdict, PartitionCertificate, RegularityConfig,
    SampledVerdict,
};

use thiserror::Error;

use crate::logic::Signature;
use crate::model::{Model, ModelError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range (graph has {size} vertices)")]
    VertexOutOfRange { vertex: usize, size: usize },
    #[error("loops are not allowed (vertex {0})")]
    Loop(usize),
    #[error("vertex sets must be nonempty")]
    EmptySet,
    #[error("vertex sets must be disjoint (both contain {0})")]
    Overlap(usize),
    #[error("duplicate vertex {0} in set")]
    Duplicate(usize),
    #[error("side of size {size} exceeds the exact-check cap {cap}; use the sampled variant")]
    ExactCapExceeded { size: usize, cap: usize },
    #[error("line {line}: malformed edge `{text}`")]
    MalformedEdge { text: String, line: usize },
    #[error("the graph contains a half-graph of height {height}; standard partitioning applies")]
    NotStable { height: usize, a: Vec<usize>, b: Vec<usize> },
    #[error("epsilon must satisfy 0 < eps <= 1")]
    BadEpsilon,
}

/// An undirected loopless graph on vertices 0..n, adjacency stored as
/// per-vertex bitset rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u64>>,
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        let words = n.div_ceil(64);
        Graph {
            n,
            adj: vec![vec![0u64; words]; n],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.n {
            return Err(GraphError::VertexOutOfRange {
                vertex: u,
                size: self.n,
            });
        }
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange {
                vertex: v,
                size: self.n,
            });
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        self.adj[u][v / 64] |= 1 << (v % 64);
        self.adj[v][u / 64] |= 1 << (u % 64);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u][v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.adj[v];
        (0..self.n).filter(move |&u| row[u / 64] >> (u % 64) & 1 == 1)
    }

    pub(crate) fn row(&self, v: usize) -> &[u64] {
        &self.adj[v]
    }

    /// Neighborhood within a set, as a count.
    pub(crate) fn degree_into(&self, v: usize, set: &[u64]) -> usize {
        self.adj[v]
            .iter()
            .zip(set)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::new(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    }

    /// Parses edge-list text: one `u v` pair per line, 0-based; `#` starts a
    /// comment.
    pub fn from_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut edges = Vec::new();
        let mut max = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<usize, GraphError> {
                s.and_then(|w| w.parse().ok())
                    .ok_or(GraphError::MalformedEdge {
                        text: raw.to_string(),
                        line: lineno + 1,
                    })
            };
            let u = parse(it.next())?;
            let v = parse(it.next())?;
            if it.next().is_some() {
                return Err(GraphError::MalformedEdge {
                    text: raw.to_string(),
                    line: lineno + 1,
                });
            }
            max = max.max(u).max(v);
            edges.push((u, v));
        }
        let mut g = Graph::new(if edges.is_empty() { 0 } else { max + 1 });
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Reads a graph back out of a model over `rel E /2`, requiring the
    /// relation to be symmetric and irreflexive.
    pub fn from_model(m: &Model) -> Result<Graph, GraphError> {
        let n = m.size();
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in 0..n {
                let fwd = m.rel_holds("E", &[u, v]).map_err(|_| GraphError::MalformedEdge {
                    text: "model lacks a binary relation E".to_string(),
                    line: 0,
                })?;
                if !fwd {
                    continue;
                }
                if u == v {
                    return Err(GraphError::Loop(u));
                }
                if !m.rel_holds("E", &[v, u]).unwrap_or(false) {
                    return Err(GraphError::MalformedEdge {
                        text: format!("edge relation not symmetric at ({u}, {v})"),
                        line: 0,
                    });
                }
                if u < v {
                    g.add_edge(u, v)?;
                }
            }
        }
        Ok(g)
    }

    /// The graph as a model with one symmetric binary relation `E`.
    pub fn to_model(&self) -> Result<Model, ModelError> {
        let mut b = Model::builder(Signature::graph(), self.n);
        for u in 0..self.n {
            for v in self.neighbors(u) {
                b.add_rel_tuple("E", &[u, v])?;
            }
        }
        b.finish()
    }
}

pub(crate) fn set_to_mask(n: usize, set: &[usize]) -> Result<Vec<u64>, GraphError> {
    let mut mask = vec![0u64; n.div_ceil(64)];
    for &v in set {
        if v >= n {
            return Err(GraphError::VertexOutOfRange { vertex: v, size: n });
        }
        if mask[v / 64] >> (v % 64) & 1 == 1 {
            return Err(GraphError::Duplicate(v));
        }
        mask[v / 64] |= 1 << (v % 64);
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edge_list("0 1\n1 2\n# comment\n\n2 3\n").unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 3);
        assert!(g.has_edge(1, 0) && g.has_edge(2, 3));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn loops_rejected() {
        let mut g = Graph::new(3);
        assert!(matches!(g.add_edge(1, 1), Err(GraphError::Loop(1))));
    }

    #[test]
    fn complement_inverts_adjacency() {
        let mut g = Graph::new(4);
        g.add_edge(0, 1).unwrap();
        let c = g.complement();
        assert!(!c.has_edge(0, 1));
        assert!(c.has_edge(0, 2) && c.has_edge(2, 3));
        assert_eq!(g.edge_count() + c.edge_count(), 6);
    }

    #[test]
    fn to_model_has_symmetric_edge_relation() {
        let mut g = Graph::new(3);
        g.add_edge(0, 2).unwrap();
        let m = g.to_model().unwrap();
        assert!(m.rel_holds("E", &[0, 2]).unwrap());
        assert!(m.rel_holds("E", &[2, 0]).unwrap());
        assert!(!m.rel_holds("E", &[0, 1]).unwrap());
    }
}
