//! Plain-text edge lists.
//!
//! ```text
//! undirected 4
//! # comment
//! 0 1
//! 1 2 0.5
//! ```
//!
//! The header is `directed` or `undirected`, optionally followed by the vertex
//! count (otherwise the largest index plus one). Weights default to 1.

use std::fmt::Write as _;
use std::path::Path;

use super::MemoryGraph;
use crate::error::{CdamError, Result};

pub(super) fn to_text(graph: &MemoryGraph) -> String {
    let mut out = String::new();
    let kind = if graph.is_directed() {
        "directed"
    } else {
        "undirected"
    };
    let _ = writeln!(out, "{kind} {}", graph.vertex_count());
    for e in graph.edges() {
        if e.weight == 1.0 {
            let _ = writeln!(out, "{} {}", e.source, e.target);
        } else {
            // `{:?}` prints the shortest repr that round-trips exactly
            let _ = writeln!(out, "{} {} {:?}", e.source, e.target, e.weight);
        }
    }
    out
}

pub fn parse_graph(text: &str) -> Result<MemoryGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| CdamError::Format("empty graph file".into()))?;
    let mut head = header.split_whitespace();
    let directed = match head.next() {
        Some("directed") => true,
        Some("undirected") => false,
        other => {
            return Err(CdamError::Format(format!(
                "line {hline}: expected `directed` or `undirected`, found {other:?}"
            )))
        }
    };
    let declared = head
        .next()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| CdamError::Format(format!("line {hline}: bad vertex count `{tok}`")))
        })
        .transpose()?;

    let mut edges = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(CdamError::Format(format!(
                "line {ln}: expected `src dst [weight]`"
            )));
        }
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| CdamError::Format(format!("line {ln}: bad vertex index `{s}`")))
        };
        let weight = match fields.get(2) {
            Some(w) => w
                .parse::<f64>()
                .map_err(|_| CdamError::Format(format!("line {ln}: bad weight `{w}`")))?,
            None => 1.0,
        };
        edges.push((idx(fields[0])?, idx(fields[1])?, weight));
    }

    let inferred = edges.iter().map(|&(s, t, _)| s.max(t) + 1).max().unwrap_or(0);
    let p = declared.unwrap_or(inferred);
    let mut graph = MemoryGraph::new(p, directed);
    for (s, t, w) in edges {
        graph.add_weighted_edge(s, t, w)?;
    }
    Ok(graph)
}

pub fn read_graph(path: &Path) -> Result<MemoryGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn write_graph(graph: &MemoryGraph, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(graph))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_weights() {
        let g = parse_graph("# lead\n\ndirected\n0 1\n1 2 0.25 # tail\n").unwrap();
        assert!(g.is_directed());
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges()[1].weight, 0.25);
    }

    #[test]
    fn declared_count_keeps_isolated_vertices() {
        let g = parse_graph("undirected 5\n0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 5);
    }

    #[test]
    fn rejects_bad_header_and_lines() {
        assert!(matches!(parse_graph("graph\n0 1"), Err(CdamError::Format(_))));
        assert!(parse_graph("directed\n0").is_err());
        assert!(parse_graph("directed\n0 x").is_err());
        assert!(parse_graph("").is_err());
        assert!(matches!(
            parse_graph("undirected 2\n0 5"),
            Err(CdamError::InvalidSize(_))
        ));
    }

    proptest! {
        #[test]
        fn text_round_trip(
            p in 1usize..12,
            directed in any::<bool>(),
            raw in prop::collection::vec((0usize..64, 0usize..64, -4.0f64..4.0), 0..30),
        ) {
            let mut g = MemoryGraph::new(p, directed);
            for (s, t, w) in raw {
                g.add_weighted_edge(s % p, t % p, w).unwrap();
            }
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("g.graph");
            write_graph(&g, &path).unwrap();
            let back = read_graph(&path).unwrap();
            prop_assert_eq!(back.vertex_count(), g.vertex_count());
            prop_assert_eq!(back.is_directed(), g.is_directed());
            prop_assert_eq!(back.sorted_edges(), g.sorted_edges());
        }
    }
}
