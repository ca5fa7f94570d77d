//! Finite automata stored as attractors: one pattern per state and one per
//! (state, label) transition, sharing the state's content on reserved slots.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use ndarray::Array1;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pnm::read_pnm;
use super::words::{LabelEmbedder, WordVectors};
use crate::dynamics::PatternMatrix;
use crate::error::{CdamError, Result};
use crate::graph::{build_automaton_graph, MemoryGraph};
use crate::rng;

/// Where a state's content vector comes from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContentSource {
    /// Seeded uniform `[0, 1]` values.
    #[default]
    Random,
    /// A netpbm image, scaled by its maxval and sampled to `n` values.
    Image(PathBuf),
    /// Explicit values, tiled or truncated to `n`.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub content: ContentSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub source: String,
    pub label: String,
    pub target: String,
}

fn default_reserve() -> f64 {
    0.75
}

fn default_true() -> bool {
    true
}

/// Automaton description, usually read from TOML:
///
/// ```toml
/// reserve_fraction = 0.75
/// [[states]]
/// name = "Homer"
/// aliases = ["H"]
/// [[transitions]]
/// source = "Homer"
/// label = "wife"
/// target = "Marge"
/// [label_aliases]
/// W = "wife"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutomatonSpec {
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub transitions: Vec<TransitionSpec>,
    #[serde(default = "default_reserve")]
    pub reserve_fraction: f64,
    #[serde(default)]
    pub label_aliases: BTreeMap<String, String>,
    #[serde(default)]
    pub word_vectors: Option<PathBuf>,
    /// Hash-seeded embeddings for labels missing from the word vectors.
    #[serde(default = "default_true")]
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexRole {
    State(usize),
    Transition(usize),
}

fn same(a: &str, b: &str) -> bool {
    a.eq_ignore_ascii_case(b)
}

impl AutomatonSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| CdamError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a TOML spec; relative file paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut spec = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for s in &mut spec.states {
            if let ContentSource::Image(p) = &mut s.content {
                resolve(p);
            }
        }
        if let Some(p) = &mut spec.word_vectors {
            resolve(p);
        }
        Ok(spec)
    }

    /// The four-person family used throughout the automaton experiments.
    pub fn family_tree() -> Self {
        let state = |name: &str, alias: &str| StateSpec {
            name: name.into(),
            aliases: vec![alias.into()],
            content: ContentSource::Random,
        };
        let t = |source: &str, label: &str, target: &str| TransitionSpec {
            source: source.into(),
            label: label.into(),
            target: target.into(),
        };
        let aliases = [
            ("W", "wife"),
            ("Hu", "husband"),
            ("So", "son"),
            ("D", "daughter"),
            ("Br", "brother"),
            ("Si", "sister"),
            ("Mo", "mother"),
            ("F", "father"),
        ];
        Self {
            states: vec![
                state("Homer", "H"),
                state("Marge", "M"),
                state("Lisa", "L"),
                state("Bart", "B"),
            ],
            transitions: vec![
                t("Homer", "wife", "Marge"),
                t("Homer", "son", "Bart"),
                t("Homer", "daughter", "Lisa"),
                t("Marge", "husband", "Homer"),
                t("Marge", "son", "Bart"),
                t("Marge", "daughter", "Lisa"),
                t("Lisa", "mother", "Marge"),
                t("Lisa", "father", "Homer"),
                t("Lisa", "brother", "Bart"),
                t("Bart", "mother", "Marge"),
                t("Bart", "father", "Homer"),
                t("Bart", "sister", "Lisa"),
            ],
            reserve_fraction: 0.75,
            label_aliases: aliases
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            word_vectors: None,
            fallback: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.states.is_empty() {
            return Err(CdamError::Spec("automaton has no states".into()));
        }
        if !(self.reserve_fraction > 0.0 && self.reserve_fraction < 1.0) {
            return Err(CdamError::Spec(format!(
                "reserve fraction must lie in (0, 1), got {}",
                self.reserve_fraction
            )));
        }
        let mut names = HashSet::new();
        for s in &self.states {
            for n in std::iter::once(&s.name).chain(&s.aliases) {
                if !names.insert(n.to_ascii_lowercase()) {
                    return Err(CdamError::Spec(format!("state name `{n}` is not unique")));
                }
            }
        }
        let mut pairs = HashSet::new();
        for t in &self.transitions {
            for end in [&t.source, &t.target] {
                self.state_index(end)
                    .map_err(|_| CdamError::Spec(format!("transition names unknown state `{end}`")))?;
            }
            let key = (self.state_index(&t.source)?, t.label.to_ascii_lowercase());
            if !pairs.insert(key) {
                return Err(CdamError::Spec(format!(
                    "duplicate transition `{}` + `{}`",
                    t.source, t.label
                )));
            }
        }
        Ok(())
    }

    /// Matches a state by name or alias, ignoring ASCII case.
    pub fn state_index(&self, name: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| same(&s.name, name) || s.aliases.iter().any(|a| same(a, name)))
            .ok_or_else(|| CdamError::Lookup(format!("unknown state `{name}`")))
    }

    /// Expands a label alias; anything else passes through unchanged.
    pub fn resolve_label(&self, token: &str) -> String {
        self.label_aliases
            .get(token)
            .or_else(|| {
                self.label_aliases
                    .iter()
                    .find(|(k, _)| same(k, token))
                    .map(|(_, v)| v)
            })
            .cloned()
            .unwrap_or_else(|| token.to_string())
    }

    pub fn transition(&self, state: usize, label: &str) -> Option<usize> {
        let name = &self.states.get(state)?.name;
        self.transitions
            .iter()
            .position(|t| same(&t.source, name) && same(&t.label, label))
    }

    /// Each state's vertex followed by the vertices of its transitions.
    pub fn vertex_layout(&self) -> Vec<VertexRole> {
        let mut out = Vec::with_capacity(self.states.len() + self.transitions.len());
        for (si, s) in self.states.iter().enumerate() {
            out.push(VertexRole::State(si));
            out.extend(
                self.transitions
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| same(&t.source, &s.name))
                    .map(|(ti, _)| VertexRole::Transition(ti)),
            );
        }
        out
    }

    /// Vertex index of every state.
    pub fn state_vertices(&self) -> Vec<usize> {
        let mut out = vec![0; self.states.len()];
        for (v, role) in self.vertex_layout().into_iter().enumerate() {
            if let VertexRole::State(s) = role {
                out[s] = v;
            }
        }
        out
    }

    pub fn vertex_names(&self) -> Vec<String> {
        self.vertex_layout()
            .into_iter()
            .map(|role| match role {
                VertexRole::State(s) => self.states[s].name.clone(),
                VertexRole::Transition(t) => {
                    let tr = &self.transitions[t];
                    format!("{}+{}", tr.source, tr.label)
                }
            })
            .collect()
    }

    pub fn embedder(&self) -> Result<LabelEmbedder> {
        Ok(LabelEmbedder {
            vectors: self
                .word_vectors
                .as_deref()
                .map(WordVectors::load)
                .transpose()?,
            fallback: self.fallback,
        })
    }
}

/// Neuron indices shared with the state (reserved) or carrying the label
/// embedding (free); both sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMap {
    pub reserved: Vec<usize>,
    pub free: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ComposedAutomaton {
    pub spec: AutomatonSpec,
    pub patterns: PatternMatrix,
    pub graph: MemoryGraph,
    pub slots: SlotMap,
    pub layout: Vec<VertexRole>,
    pub names: Vec<String>,
    pub embedder: LabelEmbedder,
}

impl ComposedAutomaton {
    pub fn state_vertex(&self, state: usize) -> usize {
        self.spec.state_vertices()[state]
    }

    /// Label embedding sized to the free slots.
    pub fn embed(&self, label: &str) -> Result<Vec<f64>> {
        self.embedder.embed(label, self.slots.free.len())
    }
}

fn state_content(src: &ContentSource, n: usize, seed: u64, state: usize) -> Result<Vec<f64>> {
    match src {
        ContentSource::Random => {
            let mut r = rng::stream(seed, &[rng::TAG_CONTENT, state as u64]);
            Ok((0..n).map(|_| r.random::<f64>()).collect())
        }
        ContentSource::Image(path) => {
            let img = read_pnm(path)?;
            let scale = f64::from(img.maxval);
            let flat: Vec<f64> = img.samples.iter().map(|&s| f64::from(s) / scale).collect();
            if flat.len() >= n {
                let mut r = rng::stream(seed, &[rng::TAG_SAMPLER, state as u64]);
                let mut idx = index::sample(&mut r, flat.len(), n).into_vec();
                idx.sort_unstable();
                Ok(idx.into_iter().map(|i| flat[i]).collect())
            } else {
                Ok(flat.iter().cycle().take(n).copied().collect())
            }
        }
        ContentSource::Values(v) => {
            if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                return Err(CdamError::Spec(format!(
                    "state {state}: content values must be finite and non-empty"
                )));
            }
            Ok(v.iter().cycle().take(n).copied().collect())
        }
    }
}

/// Builds patterns, graph and slot map for an automaton over `n` neurons.
pub fn compose_automaton_patterns(
    spec: &AutomatonSpec,
    n: usize,
    seed: u64,
) -> Result<ComposedAutomaton> {
    spec.validate()?;
    let reserved_count = (spec.reserve_fraction * n as f64).floor() as usize;
    if reserved_count == 0 || reserved_count >= n {
        return Err(CdamError::InvalidSize(format!(
            "n={n} leaves {reserved_count} reserved slots; both slot groups must be non-empty"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, &[rng::TAG_SLOTS]));
    let mut reserved = perm[..reserved_count].to_vec();
    let mut free = perm[reserved_count..].to_vec();
    reserved.sort_unstable();
    free.sort_unstable();

    let embedder = spec.embedder()?;
    let contents = spec
        .states
        .iter()
        .enumerate()
        .map(|(si, s)| state_content(&s.content, n, seed, si))
        .collect::<Result<Vec<_>>>()?;

    let layout = spec.vertex_layout();
    let mut columns = Vec::with_capacity(layout.len());
    for role in &layout {
        match *role {
            VertexRole::State(s) => columns.push(contents[s].clone()),
            VertexRole::Transition(t) => {
                let tr = &spec.transitions[t];
                let mut col = contents[spec.state_index(&tr.source)?].clone();
                let emb = embedder.embed(&tr.label, free.len())?;
                for (&i, &v) in free.iter().zip(&emb) {
                    col[i] = v;
                }
                columns.push(col);
            }
        }
    }

    Ok(ComposedAutomaton {
        spec: spec.clone(),
        patterns: PatternMatrix::from_columns(&columns)?,
        graph: build_automaton_graph(spec)?,
        slots: SlotMap { reserved, free },
        names: spec.vertex_names(),
        layout,
        embedder,
    })
}

/// Overwrites the free slots of `sigma` with `embedding`; reserved slots are
/// left as they are.
pub fn stimulate_label(sigma: &mut Array1<f64>, slots: &SlotMap, embedding: &[f64]) -> Result<()> {
    if embedding.len() != slots.free.len() {
        return Err(CdamError::DimensionMismatch {
            what: "label embedding vs free slots",
            expected: slots.free.len(),
            found: embedding.len(),
        });
    }
    for (&i, &v) in slots.free.iter().zip(embedding) {
        sigma[i] = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn family_tree_graph_shape() {
        let spec = AutomatonSpec::family_tree();
        let g = build_automaton_graph(&spec).unwrap();
        assert_eq!(g.vertex_count(), 16);
        let a = g.adjacency();
        let names = spec.vertex_names();
        let idx = |n: &str| names.iter().position(|x| x == n).unwrap();
        for s in ["Homer", "Marge", "Lisa", "Bart"] {
            assert_eq!(a[[idx(s), idx(s)]], 1.0);
        }
        assert_eq!(a[[idx("Marge+husband"), idx("Homer")]], 1.0);
        assert_eq!(a[[idx("Homer"), idx("Marge+husband")]], 0.0);
        // transition vertices receive nothing
        for (v, role) in spec.vertex_layout().iter().enumerate() {
            if matches!(role, VertexRole::Transition(_)) {
                assert_eq!(a.column(v).sum(), 0.0);
            }
        }
    }

    #[test]
    fn empty_transition_set() {
        let mut spec = AutomatonSpec::family_tree();
        spec.transitions.clear();
        let g = build_automaton_graph(&spec).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges().len(), 4);
        assert!(g.edges().iter().all(|e| e.source == e.target));
    }

    #[test]
    fn spec_errors() {
        let mut spec = AutomatonSpec::family_tree();
        spec.transitions[0].target = "Maggie".into();
        assert!(matches!(build_automaton_graph(&spec), Err(CdamError::Spec(_))));
        let mut spec = AutomatonSpec::family_tree();
        spec.states[1].aliases = vec!["homer".into()];
        assert!(spec.validate().is_err());
        let mut spec = AutomatonSpec::family_tree();
        spec.reserve_fraction = 1.0;
        assert!(spec.validate().is_err());
        let mut spec = AutomatonSpec::family_tree();
        let dup = spec.transitions[0].clone();
        spec.transitions.push(dup);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let spec = AutomatonSpec::family_tree();
        let text = toml::to_string(&spec).unwrap();
        let back = AutomatonSpec::from_toml_str(&text).unwrap();
        assert_eq!(back, spec);
        let small = AutomatonSpec::from_toml_str(
            "[[states]]\nname = \"A\"\ncontent = { values = [0.1, 0.9] }\n",
        )
        .unwrap();
        assert_eq!(small.reserve_fraction, 0.75);
        assert!(small.fallback);
        assert_eq!(small.states[0].content, ContentSource::Values(vec![0.1, 0.9]));
        assert!(matches!(
            AutomatonSpec::from_toml_str("states = 3"),
            Err(CdamError::Spec(_))
        ));
    }

    #[test]
    fn aliases_resolve() {
        let spec = AutomatonSpec::family_tree();
        assert_eq!(spec.state_index("m").unwrap(), 1);
        assert_eq!(spec.state_index("Lisa").unwrap(), 2);
        assert_eq!(spec.resolve_label("Hu"), "husband");
        assert_eq!(spec.resolve_label("br"), "brother");
        assert_eq!(spec.resolve_label("uncle"), "uncle");
        assert_eq!(spec.transition(1, "husband"), Some(3));
        assert_eq!(spec.transition(0, "brother"), None);
    }

    #[test]
    fn composed_family_tree() {
        let c = compose_automaton_patterns(&AutomatonSpec::family_tree(), 1000, 4).unwrap();
        assert_eq!(c.patterns.p(), 16);
        assert_eq!(c.slots.reserved.len(), 750);
        assert_eq!(c.slots.free.len(), 250);
        let homer = c.patterns.pattern(0);
        let homer_son = c.patterns.pattern(c.names.iter().position(|n| n == "Homer+son").unwrap());
        for &i in &c.slots.reserved {
            assert_eq!(homer[i], homer_son[i]);
        }
        let emb = c.embed("son").unwrap();
        for (k, &i) in c.slots.free.iter().enumerate() {
            assert_eq!(homer_son[i], emb[k]);
        }
    }

    #[test]
    fn single_state_degenerate() {
        let spec = AutomatonSpec::from_toml_str("[[states]]\nname = \"Solo\"\n").unwrap();
        let c = compose_automaton_patterns(&spec, 8, 0).unwrap();
        assert_eq!(c.patterns.p(), 1);
        assert_eq!(c.graph.edges().len(), 1);
        assert!(compose_automaton_patterns(&spec, 1, 0).is_err());
    }

    #[test]
    fn stimulation_touches_only_free_slots() {
        let c = compose_automaton_patterns(&AutomatonSpec::family_tree(), 100, 1).unwrap();
        let mut sigma = c.patterns.pattern(1).to_owned();
        let before = sigma.clone();
        let emb = c.embed("husband").unwrap();
        stimulate_label(&mut sigma, &c.slots, &emb).unwrap();
        for &i in &c.slots.reserved {
            assert_eq!(sigma[i], before[i]);
        }
        assert!(stimulate_label(&mut sigma, &c.slots, &[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn reserved_restriction_matches_source(seed in 0u64..1000, n in 8usize..200) {
            let c = compose_automaton_patterns(&AutomatonSpec::family_tree(), n, seed).unwrap();
            for (v, role) in c.layout.iter().enumerate() {
                if let VertexRole::Transition(t) = role {
                    let src = c.spec.state_index(&c.spec.transitions[*t].source).unwrap();
                    let sv = c.state_vertex(src);
                    for &i in &c.slots.reserved {
                        prop_assert_eq!(c.patterns.values()[[i, v]], c.patterns.values()[[i, sv]]);
                    }
                }
            }
            prop_assert!(c.patterns.values().iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}
