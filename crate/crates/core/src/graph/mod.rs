//! Memory graphs: one vertex per stored pattern, edges carry the
//! hetero-associative links used by the dynamics.

mod builders;
mod io;

pub use builders::{
    build_automaton_graph, build_barbell, build_cycle, build_named, build_nn_scaffold,
    build_random_regular, named_blocks, parse_blocks, NamedGraph, REGULAR_RETRY_BUDGET,
};
pub use io::{parse_graph, read_graph, write_graph};

use std::collections::VecDeque;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CdamError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Weighted (multi)graph over `p` pattern vertices.
///
/// Undirected edges are stored once with `source <= target` and expanded
/// symmetrically by [`MemoryGraph::adjacency`]. Parallel edges are kept in
/// the edge list and summed in the adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    directed: bool,
    allow_loops: bool,
}

impl MemoryGraph {
    /// Empty graph with self-loops permitted.
    pub fn new(vertex_count: usize, directed: bool) -> Self {
        Self {
            vertex_count,
            edges: Vec::new(),
            directed,
            allow_loops: true,
        }
    }

    pub fn without_loops(vertex_count: usize, directed: bool) -> Self {
        Self {
            allow_loops: false,
            ..Self::new(vertex_count, directed)
        }
    }

    pub fn add_edge(&mut self, source: usize, target: usize) -> Result<()> {
        self.add_weighted_edge(source, target, 1.0)
    }

    pub fn add_weighted_edge(&mut self, source: usize, target: usize, weight: f64) -> Result<()> {
        let p = self.vertex_count;
        if source >= p || target >= p {
            return Err(CdamError::InvalidSize(format!(
                "edge ({source}, {target}) outside vertex range 0..{p}"
            )));
        }
        if !weight.is_finite() {
            return Err(CdamError::InvalidParameter(format!(
                "edge ({source}, {target}) has non-finite weight {weight}"
            )));
        }
        if source == target && !self.allow_loops {
            return Err(CdamError::InvalidParameter(format!(
                "self-loop at {source} in a loop-free graph"
            )));
        }
        let (source, target) = if self.directed {
            (source, target)
        } else {
            (source.min(target), source.max(target))
        };
        self.edges.push(Edge {
            source,
            target,
            weight,
        });
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn allows_loops(&self) -> bool {
        self.allow_loops
    }

    /// `A[i][j]` is the summed weight of edges `i -> j`.
    pub fn adjacency(&self) -> Array2<f64> {
        let p = self.vertex_count;
        let mut a = Array2::zeros((p, p));
        for e in &self.edges {
            a[[e.source, e.target]] += e.weight;
            if !self.directed && e.source != e.target {
                a[[e.target, e.source]] += e.weight;
            }
        }
        a
    }

    /// Weighted out-degree (row sums of the adjacency).
    pub fn out_degrees(&self) -> Vec<f64> {
        let a = self.adjacency();
        a.rows().into_iter().map(|r| r.sum()).collect()
    }

    /// Weighted in-degree (column sums of the adjacency).
    pub fn in_degrees(&self) -> Vec<f64> {
        let a = self.adjacency();
        a.columns().into_iter().map(|c| c.sum()).collect()
    }

    /// Neighbours of `v` in the undirected support, ignoring loops, sorted.
    pub fn support_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|e| {
                if e.source == e.target {
                    None
                } else if e.source == v {
                    Some(e.target)
                } else if e.target == v {
                    Some(e.source)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn support_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            if e.source != e.target {
                lists[e.source].push(e.target);
                lists[e.target].push(e.source);
            }
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        lists
    }

    /// BFS hop distances from `from` on the undirected support.
    pub fn hop_distances(&self, from: usize) -> Vec<Option<usize>> {
        let lists = self.support_lists();
        let mut dist = vec![None; self.vertex_count];
        if from >= self.vertex_count {
            return dist;
        }
        let mut queue = VecDeque::from([from]);
        dist[from] = Some(0);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &w in &lists[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected-component label per vertex (undirected support), labels
    /// assigned in order of lowest member index.
    pub fn components(&self) -> Vec<usize> {
        let lists = self.support_lists();
        let mut label = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        for start in 0..self.vertex_count {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(v) = stack.pop() {
                for &w in &lists[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Edge list sorted for multiset comparison.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut edges = self.edges.clone();
        edges.sort_by(|x, y| {
            (x.source, x.target)
                .cmp(&(y.source, y.target))
                .then(x.weight.total_cmp(&y.weight))
        });
        edges
    }

    /// SHA-256 over the canonical text serialization, hex encoded.
    pub fn fingerprint(&self) -> String {
        let canonical = MemoryGraph {
            edges: self.sorted_edges(),
            ..self.clone()
        };
        let text = io::to_text(&canonical);
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// How the adjacency is turned into the coupling matrix used by the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// `D^{-1/2} A D^{-1/2}` (out-degree on the left, in-degree on the right
    /// for directed graphs).
    Normalized,
    /// `M = A`, used by the k-regular quiescence analysis.
    Raw,
}

/// Coupling matrix derived from a [`MemoryGraph`]; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: Array2<f64>,
    fingerprint: String,
    coupling: Coupling,
}

impl NormalizedAdjacency {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Wraps an arbitrary square matrix; mainly for tests and oracles.
    pub fn from_matrix(matrix: Array2<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(CdamError::DimensionMismatch {
                what: "coupling matrix columns",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            fingerprint: String::from("matrix"),
            coupling: Coupling::Raw,
        })
    }
}

/// Normalised adjacency `M = D^{-1/2} A D^{-1/2}`.
///
/// Undirected graphs use the weighted degree on both sides. Directed graphs
/// scale row `i` by `1/sqrt(out(i))` and column `j` by `1/sqrt(in(j))`.
/// Vertices with no (positive) degree keep all-zero rows/columns.
pub fn normalize(graph: &MemoryGraph) -> NormalizedAdjacency {
    let a = graph.adjacency();
    let inv_sqrt = |d: f64| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 };
    let rows: Vec<f64> = a.rows().into_iter().map(|r| inv_sqrt(r.sum())).collect();
    let cols: Vec<f64> = if graph.is_directed() {
        a.columns().into_iter().map(|c| inv_sqrt(c.sum())).collect()
    } else {
        rows.clone()
    };
    let mut m = a;
    for ((i, j), v) in m.indexed_iter_mut() {
        *v *= rows[i] * cols[j];
    }
    NormalizedAdjacency {
        matrix: m,
        fingerprint: graph.fingerprint(),
        coupling: Coupling::Normalized,
    }
}

/// Unnormalised coupling `M = A`.
pub fn raw_coupling(graph: &MemoryGraph) -> NormalizedAdjacency {
    NormalizedAdjacency {
        matrix: graph.adjacency(),
        fingerprint: graph.fingerprint(),
        coupling: Coupling::Raw,
    }
}

pub fn coupling(graph: &MemoryGraph, kind: Coupling) -> NormalizedAdjacency {
    match kind {
        Coupling::Normalized => normalize(graph),
        Coupling::Raw => raw_coupling(graph),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn star(leaves: usize) -> MemoryGraph {
        let mut g = MemoryGraph::new(leaves + 1, false);
        for l in 1..=leaves {
            g.add_edge(0, l).unwrap();
        }
        g
    }

    #[test]
    fn star_center_leaf_entries() {
        // D_center = 3, D_leaf = 1  =>  1 / sqrt(3 * 1)
        let m = normalize(&star(3));
        for l in 1..=3 {
            assert_abs_diff_eq!(m.matrix()[[0, l]], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
            assert_abs_diff_eq!(m.matrix()[[l, 0]], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        }
        assert_eq!(m.matrix()[[1, 2]], 0.0);
    }

    #[test]
    fn isolated_vertex_rows_are_zero() {
        let mut g = MemoryGraph::new(4, false);
        g.add_edge(0, 1).unwrap();
        let m = normalize(&g);
        assert!(m.matrix().row(3).iter().all(|&x| x == 0.0));
        assert!(m.matrix().column(2).iter().all(|&x| x == 0.0));
        assert!(m.matrix().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn parallel_edges_are_summed() {
        let mut g = MemoryGraph::new(2, true);
        g.add_edge(0, 1).unwrap();
        g.add_weighted_edge(0, 1, 2.5).unwrap();
        assert_eq!(g.adjacency()[[0, 1]], 3.5);
    }

    #[test]
    fn rejects_out_of_range_and_bad_weights() {
        let mut g = MemoryGraph::without_loops(3, false);
        assert!(matches!(g.add_edge(0, 3), Err(CdamError::InvalidSize(_))));
        assert!(g.add_weighted_edge(0, 1, f64::NAN).is_err());
        assert!(g.add_edge(1, 1).is_err());
    }

    #[test]
    fn undirected_edges_stored_canonically() {
        let mut g = MemoryGraph::new(3, false);
        g.add_edge(2, 0).unwrap();
        assert_eq!(g.edges()[0].source, 0);
        assert_eq!(g.edges()[0].target, 2);
        let a = g.adjacency();
        assert_eq!(a[[0, 2]], 1.0);
        assert_eq!(a[[2, 0]], 1.0);
    }

    #[test]
    fn hop_distances_and_components() {
        let mut g = MemoryGraph::new(6, false);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_edge(3, 4).unwrap();
        let d = g.hop_distances(0);
        assert_eq!(d, vec![Some(0), Some(1), Some(2), None, None, None]);
        assert_eq!(g.components(), vec![0, 0, 0, 1, 1, 2]);
    }

    #[test]
    fn fingerprint_ignores_insertion_order() {
        let mut g1 = MemoryGraph::new(3, false);
        g1.add_edge(0, 1).unwrap();
        g1.add_edge(1, 2).unwrap();
        let mut g2 = MemoryGraph::new(3, false);
        g2.add_edge(2, 1).unwrap();
        g2.add_edge(1, 0).unwrap();
        assert_eq!(g1.fingerprint(), g2.fingerprint());
        let mut g3 = g1.clone();
        g3.add_edge(0, 2).unwrap();
        assert_ne!(g1.fingerprint(), g3.fingerprint());
    }
}
