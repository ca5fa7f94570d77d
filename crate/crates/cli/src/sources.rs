//! Graph and pattern source specs as typed on the command line.

use std::path::{Path, PathBuf};

use cdam_core::graph::{
    build_barbell, build_cycle, build_random_regular, parse_blocks, read_graph,
    NamedGraph,
};
use cdam_core::ingest::{compose_automaton_patterns, ingest_frames, load_idx, ComposedAutomaton};
use cdam_core::{random_patterns, AutomatonSpec, CdamError, MemoryGraph, PatternMatrix, Result};

fn usage(msg: impl Into<String>) -> CdamError {
    CdamError::InvalidParameter(msg.into())
}

fn numbers(spec: &str, args: &str, want: usize) -> Result<Vec<u64>> {
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    if parts.len() != want {
        return Err(usage(format!("`{spec}` expects {want} comma-separated numbers")));
    }
    parts
        .iter()
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| usage(format!("`{s}` in `{spec}` is not a non-negative integer")))
        })
        .collect()
}

/// Directory that overrides the bundled named graphs and default datasets.
pub fn data_dir() -> Option<PathBuf> {
    std::env::var_os("CDAM_DATA_DIR").map(PathBuf::from)
}

fn named(kind: NamedGraph) -> Result<MemoryGraph> {
    if let Some(dir) = data_dir() {
        let path = dir.join(format!("{}.graph", kind.name()));
        if path.exists() {
            return read_graph(&path);
        }
    }
    Ok(kind.graph())
}

/// Block labels for a named graph, honouring `CDAM_DATA_DIR`.
pub fn named_blocks(kind: NamedGraph) -> Result<Vec<i64>> {
    if let Some(dir) = data_dir() {
        let path = dir.join(format!("{}.blocks", kind.name()));
        if path.exists() {
            return parse_blocks(&std::fs::read_to_string(path)?);
        }
    }
    Ok(kind.blocks())
}

/// `cycle:P`, `dicycle:P`, `barbell:N,M`, `karate`, `tutte`,
/// `regular:P,K,SEED` or `file:PATH`.
pub fn parse_graph_spec(spec: &str) -> Result<MemoryGraph> {
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "cycle" | "dicycle" => {
            let p = numbers(spec, args, 1)?[0] as usize;
            build_cycle(p, kind == "dicycle")
        }
        "barbell" => {
            let v = numbers(spec, args, 2)?;
            build_barbell(v[0] as usize, v[1] as usize)
        }
        "regular" => {
            let v = numbers(spec, args, 3)?;
            build_random_regular(v[0] as usize, v[1] as usize, v[2])
        }
        "file" if !args.is_empty() => read_graph(Path::new(args)),
        "karate" | "tutte" if args.is_empty() => named(kind.parse()?),
        _ => Err(usage(format!(
            "unknown graph spec `{spec}` (expected cycle:P, dicycle:P, barbell:N,M, karate, tutte, regular:P,K,SEED or file:PATH)"
        ))),
    }
}

/// Patterns plus, for automata, the graph they come with.
pub enum PatternSource {
    Plain(PatternMatrix),
    Automaton(Box<ComposedAutomaton>),
}

impl PatternSource {
    pub fn patterns(&self) -> &PatternMatrix {
        match self {
            PatternSource::Plain(p) => p,
            PatternSource::Automaton(c) => &c.patterns,
        }
    }
}

fn first_images(path: &Path, p: usize) -> Result<PatternMatrix> {
    let data = load_idx(path, None)?;
    if data.images.len() < p {
        return Err(usage(format!(
            "{} holds {} images, graph needs {p}",
            path.display(),
            data.images.len()
        )));
    }
    PatternMatrix::from_columns(&data.images[..p])
}

/// `random:N`, `idx:PATH`, `frames:DIR[,N]` or `automaton[:SPEC.toml][,N]`.
/// `p` is the number of patterns the graph needs.
pub fn parse_pattern_spec(spec: &str, p: Option<usize>, seed: u64) -> Result<PatternSource> {
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let need_p = || p.ok_or_else(|| usage(format!("`{spec}` needs a --graph")));
    match kind {
        "random" => {
            let n = numbers(spec, args, 1)?[0] as usize;
            Ok(PatternSource::Plain(random_patterns(n, need_p()?, seed)?))
        }
        "idx" if !args.is_empty() => Ok(PatternSource::Plain(first_images(Path::new(args), need_p()?)?)),
        "frames" if !args.is_empty() => {
            let (dir, n) = match args.rsplit_once(',') {
                Some((d, n)) if n.trim().parse::<usize>().is_ok() => (d, n.trim().parse().unwrap()),
                _ => (args, 2000),
            };
            Ok(PatternSource::Plain(ingest_frames(Path::new(dir), n, seed)?.0))
        }
        "automaton" => {
            let (file, n) = match args.rsplit_once(',') {
                Some((f, n)) if n.trim().parse::<usize>().is_ok() => (f, n.trim().parse().unwrap()),
                _ if args.trim().parse::<usize>().is_ok() => ("", args.trim().parse().unwrap()),
                _ => (args, 1000),
            };
            let spec = if file.is_empty() {
                AutomatonSpec::family_tree()
            } else {
                AutomatonSpec::load(Path::new(file))?
            };
            Ok(PatternSource::Automaton(Box::new(compose_automaton_patterns(&spec, n, seed)?)))
        }
        _ => Err(usage(format!(
            "unknown pattern spec `{spec}` (expected random:N, idx:PATH, frames:DIR[,N] or automaton[:SPEC][,N])"
        ))),
    }
}
