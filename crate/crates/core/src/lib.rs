//! Process-model discovery and analysis.
//!
//! The pipeline: [`eventlog`] turns CSV event logs into traces,
//! [`discovery`] learns a [`automaton::ProcessModel`] with k-tails state
//! merging, [`vmodel`] compiles the model into an executable verification
//! model (and Promela text), [`sim`] runs it, and [`ltl`] checks temporal
//! properties against it.

pub mod automaton;
pub mod discovery;
pub mod eventlog;
pub mod ltl;
pub mod sim;
pub mod vmodel;

pub use automaton::{ProcessModel, RunOutcome, TraceTarget};
