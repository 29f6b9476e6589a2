//! Deterministic process-model automata.
//!
//! A [`ProcessModel`] is a partial DFA over event labels with three state
//! roles: one initial state, a set of regular end states and a set of
//! irregular sink states. Models are normalized so that every state is
//! reachable and state ids follow breadth-first order from the initial
//! state; serialized names are `q0..qN` in that order.

mod dot;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dot::DotError;

pub type StateId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("initial state {0} does not exist")]
    BadInitial(StateId),
    #[error("state {0} is both an end state and a sink state")]
    RoleOverlap(StateId),
    #[error("transition ({from}, {label}) points to unknown state {to}")]
    DanglingEdge {
        from: StateId,
        label: String,
        to: StateId,
    },
    #[error("nondeterministic transitions from state `{state}` on `{label}`")]
    Nondeterministic { state: String, label: String },
    #[error("unknown state name `{0}`")]
    UnknownState(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessModel {
    state_count: usize,
    alphabet: BTreeSet<String>,
    delta: BTreeMap<(StateId, String), StateId>,
    initial: StateId,
    end_states: BTreeSet<StateId>,
    sink_states: BTreeSet<StateId>,
}

/// Result of replaying a trace against a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    End(StateId),
    Sink(StateId),
    /// No transition for the event at `position`. `unknown_label` is set
    /// when the event is not in the alphabet at all.
    Stuck {
        state: StateId,
        position: usize,
        unknown_label: bool,
    },
    Incomplete(StateId),
}

impl RunOutcome {
    pub fn is_end(&self) -> bool {
        matches!(self, RunOutcome::End(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceTarget {
    End,
    Sink,
    /// Every trace that does not get stuck.
    Any,
}

impl ProcessModel {
    /// Builds a model from raw parts and normalizes it.
    pub fn new(
        state_count: usize,
        alphabet: impl IntoIterator<Item = String>,
        edges: impl IntoIterator<Item = (StateId, String, StateId)>,
        initial: StateId,
        end_states: impl IntoIterator<Item = StateId>,
        sink_states: impl IntoIterator<Item = StateId>,
    ) -> Result<Self, ModelError> {
        let mut delta = BTreeMap::new();
        let mut alphabet: BTreeSet<String> = alphabet.into_iter().collect();
        for (from, label, to) in edges {
            for s in [from, to] {
                if s >= state_count {
                    return Err(ModelError::DanglingEdge { from, label, to });
                }
            }
            alphabet.insert(label.clone());
            match delta.insert((from, label.clone()), to) {
                Some(prev) if prev != to => {
                    return Err(ModelError::Nondeterministic {
                        state: format!("q{from}"),
                        label,
                    })
                }
                _ => {}
            }
        }
        if initial >= state_count {
            return Err(ModelError::BadInitial(initial));
        }
        let end_states: BTreeSet<_> = end_states.into_iter().collect();
        let sink_states: BTreeSet<_> = sink_states.into_iter().collect();
        for &s in end_states.iter().chain(&sink_states) {
            if s >= state_count {
                return Err(ModelError::UnknownState(format!("q{s}")));
            }
        }
        if let Some(&s) = end_states.intersection(&sink_states).next() {
            return Err(ModelError::RoleOverlap(s));
        }
        Ok(ProcessModel {
            state_count,
            alphabet,
            delta,
            initial,
            end_states,
            sink_states,
        }
        .normalized())
    }

    /// Drops unreachable states and renumbers the rest breadth-first from
    /// the initial state, following labels in lexicographic order.
    fn normalized(self) -> Self {
        let mut order = vec![usize::MAX; self.state_count];
        let mut queue = VecDeque::from([self.initial]);
        order[self.initial] = 0;
        let mut next = 1;
        while let Some(s) = queue.pop_front() {
            for (_, t) in self.successors(s) {
                if order[t] == usize::MAX {
                    order[t] = next;
                    next += 1;
                    queue.push_back(t);
                }
            }
        }
        let dropped = self.state_count - next;
        if dropped > 0 {
            log::warn!("dropping {dropped} unreachable state(s) from process model");
        }
        let keep = |s: &StateId| order[*s] != usize::MAX;
        ProcessModel {
            state_count: next,
            delta: self
                .delta
                .iter()
                .filter(|((s, _), _)| keep(s))
                .map(|((s, l), t)| ((order[*s], l.clone()), order[*t]))
                .collect(),
            initial: 0,
            end_states: self.end_states.iter().filter(|s| keep(s)).map(|s| order[*s]).collect(),
            sink_states: self.sink_states.iter().filter(|s| keep(s)).map(|s| order[*s]).collect(),
            alphabet: self.alphabet,
        }
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        0..self.state_count
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn end_states(&self) -> &BTreeSet<StateId> {
        &self.end_states
    }

    pub fn sink_states(&self) -> &BTreeSet<StateId> {
        &self.sink_states
    }

    pub fn is_end(&self, s: StateId) -> bool {
        self.end_states.contains(&s)
    }

    pub fn is_sink(&self, s: StateId) -> bool {
        self.sink_states.contains(&s)
    }

    pub fn transition_count(&self) -> usize {
        self.delta.len()
    }

    pub fn step(&self, s: StateId, label: &str) -> Option<StateId> {
        self.delta.get(&(s, label.to_string())).copied()
    }

    /// Outgoing transitions of `s`, ordered by label.
    pub fn successors(&self, s: StateId) -> impl Iterator<Item = (&str, StateId)> {
        self.delta
            .range((s, String::new())..)
            .take_while(move |((from, _), _)| *from == s)
            .map(|((_, l), t)| (l.as_str(), *t))
    }

    /// All transitions ordered by source state, then label.
    pub fn edges(&self) -> impl Iterator<Item = (StateId, &str, StateId)> {
        self.delta.iter().map(|((s, l), t)| (*s, l.as_str(), *t))
    }

    pub fn state_name(s: StateId) -> String {
        format!("q{s}")
    }

    pub fn run<S: AsRef<str>>(&self, trace: &[S]) -> RunOutcome {
        let mut state = self.initial;
        for (position, event) in trace.iter().enumerate() {
            let event = event.as_ref();
            match self.step(state, event) {
                Some(t) => state = t,
                None => {
                    return RunOutcome::Stuck {
                        state,
                        position,
                        unknown_label: !self.alphabet.contains(event),
                    }
                }
            }
        }
        self.classify_state(state)
    }

    fn classify_state(&self, s: StateId) -> RunOutcome {
        if self.is_end(s) {
            RunOutcome::End(s)
        } else if self.is_sink(s) {
            RunOutcome::Sink(s)
        } else {
            RunOutcome::Incomplete(s)
        }
    }

    /// Exhaustively walks the transition relation and collects every trace
    /// of length at most `max_len` whose outcome matches `target`. Branches
    /// that cannot reach a matching state within the remaining budget are
    /// not explored.
    pub fn enumerate_traces(&self, max_len: usize, target: TraceTarget) -> BTreeSet<Vec<String>> {
        let matches = |s: StateId| match target {
            TraceTarget::End => self.is_end(s),
            TraceTarget::Sink => self.is_sink(s),
            TraceTarget::Any => true,
        };
        // shortest distance from each state to a matching state
        let mut dist = vec![usize::MAX; self.state_count];
        let mut queue: std::collections::VecDeque<StateId> =
            self.states().filter(|&s| matches(s)).collect();
        for &s in &queue {
            dist[s] = 0;
        }
        while let Some(t) = queue.pop_front() {
            for (s, _, to) in self.edges() {
                if to == t && dist[s] == usize::MAX {
                    dist[s] = dist[t] + 1;
                    queue.push_back(s);
                }
            }
        }
        let mut found = BTreeSet::new();
        let mut prefix = Vec::new();
        if dist[self.initial] <= max_len {
            self.walk(self.initial, max_len, &dist, &mut prefix, &mut found);
        }
        found
    }

    fn walk(
        &self,
        s: StateId,
        budget: usize,
        dist: &[usize],
        prefix: &mut Vec<String>,
        found: &mut BTreeSet<Vec<String>>,
    ) {
        if dist[s] == 0 {
            found.insert(prefix.clone());
        }
        if budget == 0 {
            return;
        }
        for (label, t) in self.successors(s) {
            if dist[t] < budget {
                prefix.push(label.to_string());
                self.walk(t, budget - 1, dist, prefix, found);
                prefix.pop();
            }
        }
    }

    pub fn to_dot(&self) -> String {
        dot::to_dot(self)
    }

    pub fn from_dot(text: &str) -> Result<Self, DotError> {
        dot::from_dot(text)
    }

    pub fn to_json(&self) -> ModelJson {
        ModelJson {
            states: self.states().map(Self::state_name).collect(),
            alphabet: self.alphabet.iter().cloned().collect(),
            edges: self
                .edges()
                .map(|(s, l, t)| JsonEdge {
                    from: Self::state_name(s),
                    label: l.to_string(),
                    to: Self::state_name(t),
                })
                .collect(),
            initial: Self::state_name(self.initial),
            end_states: self.end_states.iter().map(|s| Self::state_name(*s)).collect(),
            sink_states: self.sink_states.iter().map(|s| Self::state_name(*s)).collect(),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<Self, ModelError> {
        let index: BTreeMap<&str, StateId> = json
            .states
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(name.to_string()))
        };
        let mut edges = Vec::with_capacity(json.edges.len());
        for e in &json.edges {
            edges.push((lookup(&e.from)?, e.label.clone(), lookup(&e.to)?));
        }
        Self::new(
            json.states.len(),
            json.alphabet.iter().cloned(),
            edges,
            lookup(&json.initial)?,
            json.end_states.iter().map(|s| lookup(s)).collect::<Result<Vec<_>, _>>()?,
            json.sink_states.iter().map(|s| lookup(s)).collect::<Result<Vec<_>, _>>()?,
        )
    }
}

/// JSON mirror of a [`ProcessModel`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelJson {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub edges: Vec<JsonEdge>,
    pub initial: String,
    pub end_states: Vec<String>,
    pub sink_states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonEdge {
    pub from: String,
    pub label: String,
    pub to: String,
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn ab_loop() -> ProcessModel {
        // q0 -a-> q1 -b-> q2(end) -a-> q1
        ProcessModel::new(
            3,
            [],
            [(0, "a".into(), 1), (1, "b".into(), 2), (2, "a".into(), 1)],
            0,
            [2],
            [],
        )
        .unwrap()
    }

    #[test]
    fn run_outcomes() {
        let m = ab_loop();
        assert_eq!(m.run(&words("a b")), RunOutcome::End(2));
        assert_eq!(m.run(&words("a b a")), RunOutcome::Incomplete(1));
        assert_eq!(m.run::<String>(&[]), RunOutcome::Incomplete(0));
        assert_eq!(
            m.run(&words("a a")),
            RunOutcome::Stuck {
                state: 1,
                position: 1,
                unknown_label: false
            }
        );
        assert_eq!(
            m.run(&words("z")),
            RunOutcome::Stuck {
                state: 0,
                position: 0,
                unknown_label: true
            }
        );
    }

    #[test]
    fn enumeration() {
        let m = ab_loop();
        let end = m.enumerate_traces(6, TraceTarget::End);
        let expected: BTreeSet<_> = ["a b", "a b a b", "a b a b a b"].iter().map(|s| words(s)).collect();
        assert_eq!(end, expected);
        assert!(m.enumerate_traces(0, TraceTarget::End).is_empty());
        let any = m.enumerate_traces(2, TraceTarget::Any);
        assert_eq!(any.len(), 3);
        for t in &end {
            assert!(m.run(t).is_end());
        }
    }

    #[test]
    fn empty_trace_at_end_initial() {
        let m = ProcessModel::new(1, [], [], 0, [0], []).unwrap();
        let end = m.enumerate_traces(0, TraceTarget::End);
        assert_eq!(end, BTreeSet::from([vec![]]));
    }

    #[test]
    fn normalization_renumbers_and_drops() {
        // state 3 is unreachable, initial is 2
        let m = ProcessModel::new(
            4,
            [],
            [(2, "x".into(), 0), (0, "y".into(), 1), (3, "x".into(), 1)],
            2,
            [1],
            [3],
        )
        .unwrap();
        assert_eq!(m.state_count(), 3);
        assert_eq!(m.initial(), 0);
        assert_eq!(m.step(0, "x"), Some(1));
        assert_eq!(m.step(1, "y"), Some(2));
        assert!(m.is_end(2));
        assert!(m.sink_states().is_empty());
    }

    #[test]
    fn invalid_construction() {
        assert!(matches!(
            ProcessModel::new(2, [], [(0, "a".into(), 1), (0, "a".into(), 0)], 0, [], []),
            Err(ModelError::Nondeterministic { .. })
        ));
        assert_eq!(
            ProcessModel::new(1, [], [], 0, [0], [0]),
            Err(ModelError::RoleOverlap(0))
        );
        assert_eq!(ProcessModel::new(1, [], [], 3, [], []), Err(ModelError::BadInitial(3)));
    }

    #[test]
    fn json_round_trip() {
        let m = ab_loop();
        let json = m.to_json();
        assert_eq!(json.states, vec!["q0", "q1", "q2"]);
        assert_eq!(ProcessModel::from_json(&json).unwrap(), m);
    }
}
