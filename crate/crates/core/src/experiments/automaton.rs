use ndarray::Array1;
use serde::Serialize;
use serde_json::json;

use super::{argmax, correlations, ExperimentReport};
use crate::dynamics::{Dynamics, ModelParams, NetworkState, StopRule};
use crate::error::{CdamError, Result};
use crate::graph::{normalize, NormalizedAdjacency};
use crate::ingest::{stimulate_label, ComposedAutomaton};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "detail")]
pub enum QueryOutcome {
    /// The token named a state; the network was reset to its pattern.
    SetState,
    /// A label was applied and the network converged.
    Answered,
    /// The label could not be embedded; the state is unchanged.
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub before: String,
    pub input: String,
    /// Label after alias expansion, for label queries.
    pub label: Option<String>,
    pub after: String,
    /// Correlation of the final state with the winning pattern.
    pub r: f64,
    pub outcome: QueryOutcome,
}

/// Interactive question answering over a composed automaton.
pub struct AutomatonSession<'a> {
    composed: &'a ComposedAutomaton,
    dynamics: Dynamics<'a>,
    stop: StopRule,
    vertex: usize,
    sigma: Array1<f64>,
    transcript: Vec<TranscriptEntry>,
}

impl<'a> AutomatonSession<'a> {
    /// Pure hetero-association (`a = 0, h = 1`), starting at state 0.
    pub fn new(
        composed: &'a ComposedAutomaton,
        coupling: &NormalizedAdjacency,
        stop: StopRule,
    ) -> Result<Self> {
        Self::with_params(composed, coupling, ModelParams::new(0.0, 1.0), stop)
    }

    pub fn with_params(
        composed: &'a ComposedAutomaton,
        coupling: &NormalizedAdjacency,
        params: ModelParams,
        stop: StopRule,
    ) -> Result<Self> {
        let dynamics = Dynamics::new(&composed.patterns, coupling, params)?;
        let vertex = composed.state_vertex(0);
        Ok(Self {
            composed,
            dynamics,
            stop,
            vertex,
            sigma: composed.patterns.pattern(vertex).to_owned(),
            transcript: Vec::new(),
        })
    }

    /// Name of the vertex the network currently sits in.
    pub fn current(&self) -> &str {
        &self.composed.names[self.vertex]
    }

    pub fn sigma(&self) -> &Array1<f64> {
        &self.sigma
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Resets the network to a state's clean pattern.
    pub fn set_state(&mut self, name: &str) -> Result<&TranscriptEntry> {
        let s = self.composed.spec.state_index(name)?;
        let before = self.current().to_string();
        self.vertex = self.composed.state_vertex(s);
        self.sigma = self.composed.patterns.pattern(self.vertex).to_owned();
        self.transcript.push(TranscriptEntry {
            before,
            input: name.to_string(),
            label: None,
            after: self.current().to_string(),
            r: 1.0,
            outcome: QueryOutcome::SetState,
        });
        Ok(self.transcript.last().expect("just pushed"))
    }

    /// Writes the label embedding into the free slots and converges.
    /// An unembeddable label is logged as rejected and changes nothing.
    pub fn query(&mut self, token: &str) -> Result<&TranscriptEntry> {
        let label = self.composed.spec.resolve_label(token);
        let before = self.current().to_string();
        let emb = match self.composed.embed(&label) {
            Ok(e) => e,
            Err(CdamError::Lookup(msg)) => {
                self.transcript.push(TranscriptEntry {
                    before: before.clone(),
                    input: token.to_string(),
                    label: Some(label),
                    after: before,
                    r: f64::NAN,
                    outcome: QueryOutcome::Rejected(msg),
                });
                return Ok(self.transcript.last().expect("just pushed"));
            }
            Err(e) => return Err(e),
        };
        let mut sigma = self.sigma.clone();
        stimulate_label(&mut sigma, &self.composed.slots, &emb)?;
        let (state, _) = self.dynamics.converge(&NetworkState::new(sigma), self.stop)?;
        let r = correlations(&state.sigma, &self.composed.patterns);
        let winner = argmax(&r).unwrap_or(self.vertex);
        self.vertex = winner;
        self.sigma = state.sigma;
        self.transcript.push(TranscriptEntry {
            before,
            input: token.to_string(),
            label: Some(label),
            after: self.current().to_string(),
            r: r.get(winner).copied().unwrap_or(f64::NAN),
            outcome: QueryOutcome::Answered,
        });
        Ok(self.transcript.last().expect("just pushed"))
    }

    /// State names and aliases reset the network; anything else is a label.
    pub fn apply(&mut self, token: &str) -> Result<&TranscriptEntry> {
        if self.composed.spec.state_index(token).is_ok() {
            self.set_state(token)
        } else {
            self.query(token)
        }
    }

    pub fn run_script<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<Vec<TranscriptEntry>> {
        let start = self.transcript.len();
        for t in tokens {
            self.apply(t.as_ref())?;
        }
        Ok(self.transcript[start..].to_vec())
    }
}

/// Where the network went from one start state under one label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCase {
    pub start: String,
    pub label: String,
    pub defined: bool,
    pub expected: String,
    pub got: String,
}

impl SweepCase {
    pub fn correct(&self) -> bool {
        self.expected == self.got
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub cases: Vec<SweepCase>,
    pub defined_correct: usize,
    pub defined_total: usize,
    pub undefined_correct: usize,
    pub undefined_total: usize,
}

impl SweepReport {
    pub fn all_correct(&self) -> bool {
        self.defined_correct == self.defined_total && self.undefined_correct == self.undefined_total
    }

    pub fn to_report(&self, composed: &ComposedAutomaton) -> Result<ExperimentReport> {
        let mut r = ExperimentReport::new("automaton-sweep")
            .with_grid(json!({
                "a": 0.0, "h": 1.0,
                "states": composed.spec.states.iter().map(|s| &s.name).collect::<Vec<_>>(),
                "n": composed.patterns.n(),
                "reserved_slots": composed.slots.reserved.len(),
            }))?
            .with_statistics(self)?;
        r.input("graph", composed.graph.fingerprint());
        Ok(r)
    }
}

/// Every start state under every distinct label; defined transitions should
/// reach their target and undefined ones return to the start.
pub fn automaton_sweep(composed: &ComposedAutomaton, stop: StopRule) -> Result<SweepReport> {
    let spec = &composed.spec;
    let coupling = normalize(&composed.graph);
    let mut labels: Vec<String> = Vec::new();
    for t in &spec.transitions {
        if !labels.iter().any(|l| l.eq_ignore_ascii_case(&t.label)) {
            labels.push(t.label.clone());
        }
    }
    let mut cases = Vec::new();
    for (si, state) in spec.states.iter().enumerate() {
        for label in &labels {
            let mut session = AutomatonSession::new(composed, &coupling, stop)?;
            session.set_state(&state.name)?;
            let got = session.query(label)?.after.clone();
            let tr = spec.transition(si, label);
            let expected = match tr {
                Some(t) => spec.states[spec.state_index(&spec.transitions[t].target)?].name.clone(),
                None => state.name.clone(),
            };
            cases.push(SweepCase {
                start: state.name.clone(),
                label: label.clone(),
                defined: tr.is_some(),
                expected,
                got,
            });
        }
    }
    let count = |defined: bool, correct: bool| {
        cases
            .iter()
            .filter(|c| c.defined == defined && (!correct || c.correct()))
            .count()
    };
    Ok(SweepReport {
        defined_correct: count(true, true),
        defined_total: count(true, false),
        undefined_correct: count(false, true),
        undefined_total: count(false, false),
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{compose_automaton_patterns, AutomatonSpec};

    #[test]
    fn state_tokens_reset_and_labels_query() {
        let composed = compose_automaton_patterns(&AutomatonSpec::family_tree(), 400, 0).unwrap();
        let coupling = normalize(&composed.graph);
        let mut s = AutomatonSession::new(&composed, &coupling, StopRule::default()).unwrap();
        assert_eq!(s.current(), "Homer");
        let e = s.apply("M").unwrap().clone();
        assert_eq!(e.outcome, QueryOutcome::SetState);
        assert_eq!(e.after, "Marge");
        let e = s.apply("Hu").unwrap().clone();
        assert_eq!(e.label.as_deref(), Some("husband"));
        assert_eq!(e.outcome, QueryOutcome::Answered);
        assert!(s.set_state("Nobody").is_err());
        assert_eq!(s.transcript().len(), 2);
    }

    #[test]
    fn rejected_label_leaves_state() {
        let mut spec = AutomatonSpec::family_tree();
        spec.fallback = false;
        let composed = compose_automaton_patterns(&spec, 400, 0);
        // with no word vectors and no fallback even defined labels fail to embed
        assert!(composed.is_err());
        let composed = compose_automaton_patterns(&AutomatonSpec::family_tree(), 400, 0).unwrap();
        let mut strict = composed.clone();
        strict.embedder.fallback = false;
        let coupling = normalize(&strict.graph);
        let mut s = AutomatonSession::new(&strict, &coupling, StopRule::default()).unwrap();
        let e = s.query("uncle").unwrap().clone();
        assert!(matches!(e.outcome, QueryOutcome::Rejected(_)));
        assert_eq!(e.before, e.after);
    }
}
