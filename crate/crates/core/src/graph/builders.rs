use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::SliceRandom;

use super::{parse_graph, MemoryGraph};
use crate::dynamics::PatternMatrix;
use crate::error::{CdamError, Result};
use crate::ingest::{AutomatonSpec, VertexRole};
use crate::rng;

/// Attempts allowed to the pairing model before giving up.
pub const REGULAR_RETRY_BUDGET: usize = 1000;

pub fn build_cycle(p: usize, directed: bool) -> Result<MemoryGraph> {
    if p < 3 {
        return Err(CdamError::InvalidSize(format!("cycle needs p >= 3, got {p}")));
    }
    let mut g = MemoryGraph::without_loops(p, directed);
    for i in 0..p {
        g.add_edge(i, (i + 1) % p)?;
    }
    Ok(g)
}

/// Two `K_n` cliques joined by a path of `m` vertices.
///
/// Vertices `0..n` form the first clique, `n..n+m` the path and
/// `n+m..2n+m` the second clique. The path runs from vertex `n-1` to vertex
/// `n+m`; with `m = 0` those two vertices are joined directly.
pub fn build_barbell(n: usize, m: usize) -> Result<MemoryGraph> {
    if n < 2 {
        return Err(CdamError::InvalidSize(format!("barbell clique size must be >= 2, got {n}")));
    }
    let p = 2 * n + m;
    let mut g = MemoryGraph::without_loops(p, false);
    for offset in [0, n + m] {
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(offset + i, offset + j)?;
            }
        }
    }
    for v in n - 1..n + m {
        g.add_edge(v, v + 1)?;
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedGraph {
    Karate,
    Tutte,
}

impl NamedGraph {
    pub const ALL: [NamedGraph; 2] = [NamedGraph::Karate, NamedGraph::Tutte];

    pub fn name(self) -> &'static str {
        match self {
            NamedGraph::Karate => "karate",
            NamedGraph::Tutte => "tutte",
        }
    }

    pub fn bundled_text(self) -> &'static str {
        match self {
            NamedGraph::Karate => include_str!("../../data/karate.graph"),
            NamedGraph::Tutte => include_str!("../../data/tutte.graph"),
        }
    }

    fn bundled_blocks(self) -> &'static str {
        match self {
            NamedGraph::Karate => include_str!("../../data/karate.blocks"),
            NamedGraph::Tutte => include_str!("../../data/tutte.blocks"),
        }
    }

    pub fn graph(self) -> MemoryGraph {
        parse_graph(self.bundled_text()).expect("bundled graph data is well formed")
    }

    /// Reference partition (`-1` marks vertices outside every block).
    pub fn blocks(self) -> Vec<i64> {
        parse_blocks(self.bundled_blocks()).expect("bundled block data is well formed")
    }
}

impl FromStr for NamedGraph {
    type Err = CdamError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "karate" => Ok(NamedGraph::Karate),
            "tutte" => Ok(NamedGraph::Tutte),
            other => Err(CdamError::Lookup(format!(
                "unknown named graph `{other}` (known: karate, tutte)"
            ))),
        }
    }
}

pub fn build_named(name: &str) -> Result<MemoryGraph> {
    Ok(name.parse::<NamedGraph>()?.graph())
}

pub fn named_blocks(name: &str) -> Result<Vec<i64>> {
    Ok(name.parse::<NamedGraph>()?.blocks())
}

/// Parses `vertex block` lines; vertices must appear as 0, 1, 2, ... in order.
pub fn parse_blocks(text: &str) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let bad = || CdamError::Format(format!("blocks line {}: `{line}`", i + 1));
        let v: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let b: i64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if v != out.len() {
            return Err(bad());
        }
        out.push(b);
    }
    Ok(out)
}

/// Simple `k`-regular graph on `p` vertices from the pairing model.
pub fn build_random_regular(p: usize, k: usize, seed: u64) -> Result<MemoryGraph> {
    if k >= p || (p * k) % 2 == 1 {
        return Err(CdamError::InvalidSize(format!(
            "no simple {k}-regular graph on {p} vertices"
        )));
    }
    let mut rng = rng::stream(seed, &[rng::TAG_PATTERNS, p as u64, k as u64]);
    let mut stubs: Vec<usize> = (0..p).flat_map(|v| std::iter::repeat_n(v, k)).collect();
    'attempt: for _ in 0..REGULAR_RETRY_BUDGET {
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(p * k / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
        }
        let mut pairs: Vec<_> = seen.into_iter().collect();
        pairs.sort_unstable();
        let mut g = MemoryGraph::without_loops(p, false);
        for (u, v) in pairs {
            g.add_edge(u, v)?;
        }
        return Ok(g);
    }
    Err(CdamError::RetryExhausted {
        what: format!("{k}-regular graph on {p} vertices"),
        attempts: REGULAR_RETRY_BUDGET,
    })
}

/// Links every pattern to its Euclidean nearest neighbour (lowest index wins
/// ties); duplicate proposals collapse to one undirected edge.
pub fn build_nn_scaffold(patterns: &PatternMatrix) -> Result<MemoryGraph> {
    let p = patterns.p();
    if p < 2 {
        return Err(CdamError::InvalidSize(format!(
            "nearest-neighbour scaffold needs p >= 2, got {p}"
        )));
    }
    let xi = patterns.values();
    let mut chosen = HashSet::new();
    for i in 0..p {
        let ci = xi.column(i);
        let mut best = (f64::INFINITY, usize::MAX);
        for j in (0..p).filter(|&j| j != i) {
            let d: f64 = ci
                .iter()
                .zip(xi.column(j).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            if d < best.0 {
                best = (d, j);
            }
        }
        chosen.insert((i.min(best.1), i.max(best.1)));
    }
    let mut pairs: Vec<_> = chosen.into_iter().collect();
    pairs.sort_unstable();
    let mut g = MemoryGraph::without_loops(p, false);
    for (u, v) in pairs {
        g.add_edge(u, v)?;
    }
    Ok(g)
}

/// Directed automaton graph: a self-loop on every state vertex and an edge
/// from each transition vertex to its target state.
pub fn build_automaton_graph(spec: &AutomatonSpec) -> Result<MemoryGraph> {
    spec.validate()?;
    let layout = spec.vertex_layout();
    let state_vertex = spec.state_vertices();
    let mut g = MemoryGraph::new(layout.len(), true);
    for (v, role) in layout.iter().enumerate() {
        match *role {
            VertexRole::State(_) => g.add_edge(v, v)?,
            VertexRole::Transition(t) => {
                let target = spec.state_index(&spec.transitions[t].target)?;
                g.add_edge(v, state_vertex[target])?;
            }
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalize;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn edge_set(g: &MemoryGraph) -> Vec<(usize, usize)> {
        g.sorted_edges().iter().map(|e| (e.source, e.target)).collect()
    }

    #[test]
    fn cycle_degrees() {
        let g = build_cycle(30, false).unwrap();
        assert_eq!(g.vertex_count(), 30);
        assert!(g.out_degrees().iter().all(|&d| d == 2.0));
        let d = build_cycle(50, true).unwrap();
        assert!(d.out_degrees().iter().all(|&x| x == 1.0));
        assert!(d.in_degrees().iter().all(|&x| x == 1.0));
        assert!(matches!(build_cycle(2, false), Err(CdamError::InvalidSize(_))));
    }

    #[test]
    fn triangle_and_directed_cycle_normalization() {
        let m = normalize(&build_cycle(3, false).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.0 } else { 0.5 };
                assert_abs_diff_eq!(m.matrix()[[i, j]], want, epsilon = 1e-15);
            }
        }
        let g = build_cycle(50, true).unwrap();
        assert_eq!(normalize(&g).matrix(), &g.adjacency());
    }

    #[test]
    fn barbell_hand_enumerations() {
        // n=2, m=0: cliques {0,1} and {2,3}, bridge 1-2
        let g = build_barbell(2, 0).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(edge_set(&g), vec![(0, 1), (1, 2), (2, 3)]);

        // n=3, m=1: cliques {0,1,2} and {4,5,6}, path vertex 3 between 2 and 4
        let g = build_barbell(3, 1).unwrap();
        assert_eq!(g.vertex_count(), 7);
        assert_eq!(
            edge_set(&g),
            vec![(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (4, 6), (5, 6)]
        );
        assert_eq!(g.support_neighbors(3), vec![2, 4]);

        assert_eq!(build_barbell(10, 10).unwrap().vertex_count(), 30);
        assert!(build_barbell(1, 3).is_err());
    }

    #[test]
    fn named_graphs() {
        let k = build_named("karate").unwrap();
        assert_eq!(k.vertex_count(), 34);
        assert_eq!(k.edges().len(), 78);
        let t = build_named("tutte").unwrap();
        assert_eq!(t.vertex_count(), 46);
        assert!(t.out_degrees().iter().all(|&d| d == 3.0));
        let m = normalize(&t);
        for &x in m.matrix().iter() {
            assert!(x == 0.0 || (x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(matches!(build_named("petersen"), Err(CdamError::Lookup(_))));
        assert_eq!(named_blocks("karate").unwrap().len(), 34);
        assert_eq!(named_blocks("tutte").unwrap().len(), 46);
    }

    #[test]
    fn random_regular_small_cases() {
        let k4 = build_random_regular(4, 3, 9).unwrap();
        assert_eq!(edge_set(&k4), vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(matches!(build_random_regular(5, 3, 0), Err(CdamError::InvalidSize(_))));
        assert!(build_random_regular(3, 3, 0).is_err());
        let a = build_random_regular(46, 3, 5).unwrap();
        let b = build_random_regular(46, 3, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.out_degrees().iter().all(|&d| d == 3.0));
    }

    fn one_dim(points: &[f64]) -> PatternMatrix {
        let m = Array2::from_shape_vec((1, points.len()), points.to_vec()).unwrap();
        PatternMatrix::new(m).unwrap()
    }

    #[test]
    fn nn_scaffold_collinear() {
        let g = build_nn_scaffold(&one_dim(&[0.0, 1.0, 3.0])).unwrap();
        assert_eq!(edge_set(&g), vec![(0, 1), (1, 2)]);
        let g = build_nn_scaffold(&one_dim(&[0.2, 0.9])).unwrap();
        assert_eq!(edge_set(&g), vec![(0, 1)]);
        // 1 is equidistant from 0 and 2: lowest index wins
        let g = build_nn_scaffold(&one_dim(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(edge_set(&g), vec![(0, 1), (1, 2)]);
        assert!(build_nn_scaffold(&one_dim(&[0.5])).is_err());
    }

    fn spectral_radius(m: &Array2<f64>) -> f64 {
        let n = m.nrows();
        let mut v = ndarray::Array1::from_iter((0..n).map(|i| 1.0 + i as f64 * 0.01));
        let mut lambda = 0.0;
        for _ in 0..500 {
            let w = m.dot(&v);
            lambda = w.iter().map(|x| x * x).sum::<f64>().sqrt()
                / v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            v = w / norm;
        }
        lambda
    }

    proptest! {
        #[test]
        fn regular_normalizes_to_a_over_k(seed in 0u64..200, half in 3usize..12, k in 1usize..5) {
            let p = 2 * half;
            let g = build_random_regular(p, k, seed).unwrap();
            let a = g.adjacency();
            let m = normalize(&g);
            for (x, y) in m.matrix().iter().zip(a.iter()) {
                prop_assert!((x - y / k as f64).abs() < 1e-14);
            }
        }

        #[test]
        fn zero_pattern_preserved(p in 2usize..10, raw in prop::collection::vec((0usize..10, 0usize..10, 0.1f64..3.0), 0..20), directed in any::<bool>()) {
            let mut g = MemoryGraph::new(p, directed);
            for (s, t, w) in raw {
                g.add_weighted_edge(s % p, t % p, w).unwrap();
            }
            let a = g.adjacency();
            let m = normalize(&g);
            for (x, y) in m.matrix().iter().zip(a.iter()) {
                prop_assert_eq!(*x == 0.0, *y == 0.0);
                prop_assert!(x.is_finite());
            }
            if !directed {
                let mm = m.matrix();
                prop_assert!((mm - &mm.t()).iter().all(|d| d.abs() < 1e-15));
            }
        }

        #[test]
        fn cycle_spectral_radius_at_most_one(p in 3usize..25) {
            let m = normalize(&build_cycle(p, false).unwrap());
            prop_assert!(spectral_radius(m.matrix()) <= 1.0 + 1e-9);
        }

        #[test]
        fn nn_scaffold_degree_and_edge_bound(seed in 0u64..500, p in 2usize..15) {
            let pm = crate::ingest::random_patterns(4, p, seed).unwrap();
            let g = build_nn_scaffold(&pm).unwrap();
            prop_assert!(g.edges().len() <= p);
            prop_assert!(g.out_degrees().iter().all(|&d| d >= 1.0));
        }
    }
}
