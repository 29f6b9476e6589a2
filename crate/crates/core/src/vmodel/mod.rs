//! Executable verification models.
//!
//! [`compile`] turns a [`ProcessModel`] into one guarded-choice block per
//! state. The block of the initial state comes first, the rest follow in
//! state-id order. Each block lists a `Take` option per outgoing
//! transition; end and sink blocks additionally carry a marker and a
//! `Stop` option. Entering an end block sets the sticky `end_state` flag,
//! entering a sink block sets `sink_state`. With instrumentation every
//! label gets a counter that `Take` increments.

mod naming;
mod promela;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{ProcessModel, StateId};

pub use naming::CounterNaming;
pub use promela::{emit_promela, PromelaError};

pub const END_STATE: &str = "end_state";
pub const SINK_STATE: &str = "sink_state";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Marker {
    #[serde(rename = "END")]
    End,
    #[serde(rename = "SINK")]
    Sink,
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Marker::End => "END",
            Marker::Sink => "SINK",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Choice {
    Take {
        label: String,
        target: usize,
        counter: Option<usize>,
    },
    Stop,
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Take { label, .. } => f.write_str(label),
            Choice::Stop => f.write_str("(stop)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateBlock {
    pub state: StateId,
    pub marker: Option<Marker>,
    pub options: Vec<Choice>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counter {
    pub label: String,
    pub name: String,
}

/// A variable a property may refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarRef {
    EndState,
    SinkState,
    Counter(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationModel {
    blocks: Vec<StateBlock>,
    counters: Vec<Counter>,
    instrumented: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    Block(usize),
    Stop,
}

/// Run-time context of one execution: where control is and the values of
/// all model variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VmState {
    pub location: Location,
    pub end_state: bool,
    pub sink_state: bool,
    pub counters: Vec<u64>,
}

pub fn compile(model: &ProcessModel, instrument: bool) -> VerificationModel {
    compile_with(model, instrument, &CounterNaming::default())
}

pub fn compile_with(
    model: &ProcessModel,
    instrument: bool,
    naming: &CounterNaming,
) -> VerificationModel {
    let mut order: Vec<StateId> = vec![model.initial()];
    order.extend(model.states().filter(|&s| s != model.initial()));
    let mut block_of = vec![0; model.state_count()];
    for (i, &s) in order.iter().enumerate() {
        block_of[s] = i;
    }

    let counters: Vec<Counter> = if instrument {
        naming
            .assign(model.alphabet().iter().map(String::as_str))
            .into_iter()
            .map(|(label, name)| Counter { label, name })
            .collect()
    } else {
        Vec::new()
    };
    let counter_of = |label: &str| counters.iter().position(|c| c.label == label);

    let blocks = order
        .iter()
        .map(|&s| {
            let marker = if model.is_end(s) {
                Some(Marker::End)
            } else if model.is_sink(s) {
                Some(Marker::Sink)
            } else {
                None
            };
            let mut options: Vec<Choice> = model
                .successors(s)
                .map(|(label, t)| Choice::Take {
                    label: label.to_string(),
                    target: block_of[t],
                    counter: counter_of(label),
                })
                .collect();
            if marker.is_some() {
                options.push(Choice::Stop);
            }
            StateBlock {
                state: s,
                marker,
                options,
            }
        })
        .collect();

    VerificationModel {
        blocks,
        counters,
        instrumented: instrument,
    }
}

impl VerificationModel {
    pub fn blocks(&self) -> &[StateBlock] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &StateBlock {
        &self.blocks[i]
    }

    pub fn counters(&self) -> &[Counter] {
        &self.counters
    }

    pub fn is_instrumented(&self) -> bool {
        self.instrumented
    }

    pub fn resolve(&self, name: &str) -> Option<VarRef> {
        match name {
            END_STATE => Some(VarRef::EndState),
            SINK_STATE => Some(VarRef::SinkState),
            _ => self
                .counters
                .iter()
                .position(|c| c.name == name)
                .map(VarRef::Counter),
        }
    }

    pub fn variable_name(&self, var: VarRef) -> &str {
        match var {
            VarRef::EndState => END_STATE,
            VarRef::SinkState => SINK_STATE,
            VarRef::Counter(i) => &self.counters[i].name,
        }
    }

    pub fn variable_names(&self) -> Vec<&str> {
        let mut names = vec![END_STATE, SINK_STATE];
        names.extend(self.counters.iter().map(|c| c.name.as_str()));
        names
    }

    /// State at the start of every run: control has entered block 0.
    pub fn initial_state(&self) -> (VmState, Option<Marker>) {
        let mut state = VmState {
            location: Location::Block(0),
            end_state: false,
            sink_state: false,
            counters: vec![0; self.counters.len()],
        };
        let marker = self.enter(&mut state, 0);
        (state, marker)
    }

    fn enter(&self, state: &mut VmState, block: usize) -> Option<Marker> {
        state.location = Location::Block(block);
        let marker = self.blocks[block].marker;
        match marker {
            Some(Marker::End) => state.end_state = true,
            Some(Marker::Sink) => state.sink_state = true,
            None => {}
        }
        marker
    }

    /// Options enabled in `state`; empty at the stop pseudo-state.
    pub fn options(&self, state: &VmState) -> &[Choice] {
        match state.location {
            Location::Block(b) => &self.blocks[b].options,
            Location::Stop => &[],
        }
    }

    /// Executes option `index` of the current block. Counters saturate at
    /// `caps[i]`; a cap of zero leaves that counter untouched.
    pub fn apply(&self, state: &VmState, index: usize, caps: &[u64]) -> (VmState, Option<Marker>) {
        let mut next = state.clone();
        match &self.options(state)[index] {
            Choice::Stop => {
                next.location = Location::Stop;
                (next, None)
            }
            Choice::Take {
                target, counter, ..
            } => {
                if let Some(c) = counter {
                    let cap = caps.get(*c).copied().unwrap_or(u64::MAX);
                    next.counters[*c] = (next.counters[*c] + 1).min(cap);
                }
                let marker = self.enter(&mut next, *target);
                (next, marker)
            }
        }
    }

    pub fn value(&self, state: &VmState, var: VarRef) -> i64 {
        match var {
            VarRef::EndState => state.end_state as i64,
            VarRef::SinkState => state.sink_state as i64,
            VarRef::Counter(i) => state.counters[i].min(i64::MAX as u64) as i64,
        }
    }

    pub fn unbounded_caps(&self) -> Vec<u64> {
        vec![u64::MAX; self.counters.len()]
    }
}
