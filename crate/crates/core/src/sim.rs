//! Simulation of verification models.
//!
//! Random choices come from ChaCha8 seeded with the run's 64-bit seed, so a
//! run is a pure function of `(model, seed, max_steps)`. Every enabled
//! option, `Stop` included, is drawn with equal probability.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vmodel::{Choice, Location, Marker, StateBlock, VerificationModel, VmState};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("choice {index} is out of range ({available} options)")]
    InvalidChoice { index: usize, available: usize },
    #[error("collected {collected} of the requested examples after {attempts} runs")]
    Exhausted { collected: usize, attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunOutcome {
    Stopped,
    StepLimit,
    Deadlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VarSnapshot {
    pub end_state: u8,
    pub sink_state: u8,
    pub counters: BTreeMap<String, u64>,
}

impl VarSnapshot {
    pub fn of(vm: &VerificationModel, state: &VmState) -> Self {
        Self {
            end_state: state.end_state as u8,
            sink_state: state.sink_state as u8,
            counters: vm
                .counters()
                .iter()
                .zip(&state.counters)
                .map(|(c, v)| (c.name.clone(), *v))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub events: Vec<String>,
    /// `(number of events before the marker, marker)`
    pub markers: Vec<(usize, Marker)>,
    pub outcome: RunOutcome,
    /// Executed options: one per event plus the final `Stop`, if any.
    pub steps: usize,
    pub seed: u64,
    pub final_vars: VarSnapshot,
}

impl SimulationRun {
    pub fn reached_end(&self) -> bool {
        self.markers.iter().any(|(_, m)| *m == Marker::End)
    }

    /// Events up to the first END marker.
    pub fn until_first_end(&self) -> Option<&[String]> {
        self.markers
            .iter()
            .find(|(_, m)| *m == Marker::End)
            .map(|(pos, _)| &self.events[..*pos])
    }
}

/// The textual run form: labels interleaved with `END`/`SINK` markers.
impl fmt::Display for SimulationRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut markers = self.markers.iter().peekable();
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if !std::mem::take(&mut first) {
                f.write_str(" ")?;
            }
            Ok::<_, fmt::Error>(())
        };
        for i in 0..=self.events.len() {
            while let Some((_, m)) = markers.next_if(|(pos, _)| *pos == i) {
                sep(f)?;
                write!(f, "{m}")?;
            }
            if let Some(e) = self.events.get(i) {
                sep(f)?;
                f.write_str(e)?;
            }
        }
        Ok(())
    }
}

/// Drives one execution, asking `pick` for the option index at each step.
pub(crate) fn execute<F>(
    vm: &VerificationModel,
    max_steps: usize,
    seed: u64,
    mut pick: F,
) -> Result<SimulationRun, SimError>
where
    F: FnMut(&StateBlock, &[Choice]) -> Result<Option<usize>, SimError>,
{
    let caps = vm.unbounded_caps();
    let (mut state, marker) = vm.initial_state();
    let mut events = Vec::new();
    let mut markers: Vec<(usize, Marker)> = marker.map(|m| (0, m)).into_iter().collect();
    let mut steps = 0;
    let outcome = loop {
        let Location::Block(b) = state.location else {
            break RunOutcome::Stopped;
        };
        let options = vm.options(&state);
        if options.is_empty() {
            break RunOutcome::Deadlock;
        }
        if steps >= max_steps {
            break RunOutcome::StepLimit;
        }
        let Some(index) = pick(vm.block(b), options)? else {
            break RunOutcome::StepLimit;
        };
        if index >= options.len() {
            return Err(SimError::InvalidChoice {
                index,
                available: options.len(),
            });
        }
        if let Choice::Take { label, .. } = &options[index] {
            events.push(label.clone());
        }
        let (next, marker) = vm.apply(&state, index, &caps);
        if let Some(m) = marker {
            markers.push((events.len(), m));
        }
        state = next;
        steps += 1;
    };
    Ok(SimulationRun {
        events,
        markers,
        outcome,
        steps,
        seed,
        final_vars: VarSnapshot::of(vm, &state),
    })
}

pub fn simulate_random(vm: &VerificationModel, seed: u64, max_steps: usize) -> SimulationRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    execute(vm, max_steps, seed, |_, options| {
        Ok(Some(rng.gen_range(0..options.len())))
    })
    .expect("random choices are always in range")
}

/// Runs with `chooser` selecting each option. The chooser sees the current
/// block and its option list and returns an index into that list.
pub fn simulate_interactive<F>(
    vm: &VerificationModel,
    mut chooser: F,
    max_steps: usize,
) -> Result<SimulationRun, SimError>
where
    F: FnMut(&StateBlock, &[Choice]) -> usize,
{
    execute(vm, max_steps, 0, |block, options| Ok(Some(chooser(block, options))))
}

/// `n` random runs with seeds `base_seed, base_seed + 1, ...`, in seed
/// order.
pub fn generate_traces(
    vm: &VerificationModel,
    n: usize,
    base_seed: u64,
    max_steps: usize,
) -> Vec<SimulationRun> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| simulate_random(vm, base_seed.wrapping_add(i), max_steps))
        .collect()
}

pub fn classify(run: &SimulationRun) -> Classification {
    if run.reached_end() {
        Classification::Positive
    } else {
        Classification::Negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleSet {
    pub kind: Classification,
    pub positives: Vec<SimulationRun>,
    pub negatives: Vec<SimulationRun>,
    /// Distinct event sequences among the collected runs with their
    /// frequencies.
    pub variants: BTreeMap<Vec<String>, usize>,
    pub attempts: usize,
}

impl ExampleSet {
    pub fn collected(&self) -> &[SimulationRun] {
        match self.kind {
            Classification::Positive => &self.positives,
            Classification::Negative => &self.negatives,
        }
    }

    pub fn duplicates(&self) -> usize {
        self.collected().len() - self.variants.len()
    }
}

/// Simulates with consecutive seeds until `count` runs of `kind` are
/// collected or `max_attempts` runs have been made.
pub fn generate_examples(
    vm: &VerificationModel,
    kind: Classification,
    count: usize,
    base_seed: u64,
    max_attempts: usize,
    max_steps: usize,
) -> Result<ExampleSet, SimError> {
    let mut collected = Vec::new();
    let mut attempts = 0;
    while collected.len() < count && attempts < max_attempts {
        let run = simulate_random(vm, base_seed.wrapping_add(attempts as u64), max_steps);
        attempts += 1;
        if classify(&run) == kind {
            collected.push(run);
        }
    }
    if collected.len() < count {
        return Err(SimError::Exhausted {
            collected: collected.len(),
            attempts,
        });
    }
    let mut variants = BTreeMap::new();
    for run in &collected {
        *variants.entry(run.events.clone()).or_default() += 1;
    }
    let (positives, negatives) = match kind {
        Classification::Positive => (collected, Vec::new()),
        Classification::Negative => (Vec::new(), collected),
    };
    Ok(ExampleSet {
        kind,
        positives,
        negatives,
        variants,
        attempts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub generated: usize,
    pub runtime_s: f64,
    pub shortest: usize,
    pub longest: usize,
    pub average: f64,
    pub positive_count: usize,
    pub negative_count: usize,
    /// Positives as a percentage of negatives; infinite (serialized as
    /// `null`) when there are positives but no negatives.
    pub ratio_percent: f64,
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Trace lengths count events only, never markers.
pub fn stats<'a>(runs: impl IntoIterator<Item = &'a SimulationRun>) -> TraceStats {
    let mut generated = 0;
    let mut total = 0;
    let mut shortest = usize::MAX;
    let mut longest = 0;
    let mut positive_count = 0;
    for run in runs {
        generated += 1;
        let len = run.events.len();
        total += len;
        shortest = shortest.min(len);
        longest = longest.max(len);
        if classify(run) == Classification::Positive {
            positive_count += 1;
        }
    }
    let negative_count = generated - positive_count;
    TraceStats {
        generated,
        runtime_s: 0.0,
        shortest: if generated == 0 { 0 } else { shortest },
        longest,
        average: if generated == 0 {
            0.0
        } else {
            round2(total as f64 / generated as f64)
        },
        positive_count,
        negative_count,
        ratio_percent: match (positive_count, negative_count) {
            (0, _) => 0.0,
            (_, 0) => f64::INFINITY,
            (p, n) => round2(100.0 * p as f64 / n as f64),
        },
    }
}

impl TraceStats {
    pub fn with_runtime(mut self, runtime: Duration) -> Self {
        self.runtime_s = round2(runtime.as_secs_f64());
        self
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("Generated number of traces", self.generated.to_string()),
            ("Runtime (s)", format!("{:.2}", self.runtime_s)),
            ("Number of positive examples", self.positive_count.to_string()),
            ("Number of negative examples", self.negative_count.to_string()),
            ("Ratio positive/negative examples (%)", format!("{:.2}", self.ratio_percent)),
            ("Shortest trace length", self.shortest.to_string()),
            ("Longest trace length", self.longest.to_string()),
            ("Average trace length", format!("{:.2}", self.average)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<width$}  {v:>10}\n"));
        }
        out
    }
}

/// Output of [`normalize_external_trace`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizedTraces {
    /// Event lists, markers removed. One per run.
    pub runs: Vec<Vec<String>>,
    /// Whether each run printed an END marker.
    pub reached_end: Vec<bool>,
    pub dropped_lines: usize,
}

fn is_event_token(tok: &str) -> bool {
    let mut chars = tok.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Cleans raw simulator output: removes process-creation notices and
/// warning lines, collapses whitespace, and returns one event list per run.
/// Runs are delimited by line breaks; `END`/`SINK` markers are stripped
/// from the events. Lines containing other text are dropped and counted.
pub fn normalize_external_trace(text: &str) -> NormalizedTraces {
    let mut out = NormalizedTraces::default();
    for raw in text.lines() {
        if raw.contains("warning:") {
            continue;
        }
        let line = raw
            .replace("1 process created", "")
            .replace("processes created", "");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0].starts_with('#') || tokens.iter().any(|t| !is_event_token(t)) {
            out.dropped_lines += 1;
            continue;
        }
        if tokens.len() == 1 && tokens[0] == "timeout" {
            out.dropped_lines += 1;
            continue;
        }
        let mut events = Vec::new();
        let mut end = false;
        for t in tokens {
            match t {
                "END" => end = true,
                "SINK" => {}
                _ => events.push(t.to_string()),
            }
        }
        out.runs.push(events);
        out.reached_end.push(end);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::ProcessModel;
    use crate::vmodel::compile;

    fn single_end() -> VerificationModel {
        compile(&ProcessModel::new(1, [], [], 0, [0], []).unwrap(), true)
    }

    fn looped() -> VerificationModel {
        // q0 -a-> q0, q0 -b-> q1(end)
        compile(
            &ProcessModel::new(2, [], [(0, "a".into(), 0), (0, "b".into(), 1)], 0, [1], [])
                .unwrap(),
            false,
        )
    }

    fn run(events: &[&str], markers: Vec<(usize, Marker)>) -> SimulationRun {
        SimulationRun {
            events: events.iter().map(|s| s.to_string()).collect(),
            markers,
            outcome: RunOutcome::Stopped,
            steps: events.len() + 1,
            seed: 0,
            final_vars: VarSnapshot::default(),
        }
    }

    #[test]
    fn single_end_run() {
        for seed in [0, 1, 99] {
            let r = simulate_random(&single_end(), seed, 10);
            assert!(r.events.is_empty());
            assert_eq!(r.markers, vec![(0, Marker::End)]);
            assert_eq!(r.outcome, RunOutcome::Stopped);
            assert_eq!(r.steps, 1);
            assert_eq!(r.final_vars.end_state, 1);
            assert_eq!(r.to_string(), "END");
        }
    }

    #[test]
    fn seed_determinism() {
        let vm = looped();
        for seed in 0..50 {
            assert_eq!(simulate_random(&vm, seed, 100), simulate_random(&vm, seed, 100));
        }
    }

    #[test]
    fn step_limit_and_deadlock() {
        let vm = looped();
        let r = simulate_interactive(&vm, |_, _| 0, 5).unwrap();
        assert_eq!(r.outcome, RunOutcome::StepLimit);
        assert_eq!(r.events.len(), 5);
        assert_eq!(classify(&r), Classification::Negative);

        // q0 -a-> q1, q1 has nothing and is not terminal
        let dead = compile(&ProcessModel::new(2, [], [(0, "a".into(), 1)], 0, [], []).unwrap(), false);
        let r = simulate_random(&dead, 3, 10);
        assert_eq!(r.outcome, RunOutcome::Deadlock);
        assert_eq!(r.events, vec!["a"]);
        assert_eq!(classify(&r), Classification::Negative);
    }

    #[test]
    fn interactive_choices() {
        let vm = looped();
        let picks = ["a", "a", "b", "(stop)"];
        let mut i = 0;
        let r = simulate_interactive(
            &vm,
            |_, options| {
                let want = picks[i];
                i += 1;
                options.iter().position(|o| o.to_string() == want).unwrap()
            },
            100,
        )
        .unwrap();
        assert_eq!(r.to_string(), "a a b END");
        assert_eq!(
            simulate_interactive(&vm, |_, _| 7, 100),
            Err(SimError::InvalidChoice {
                index: 7,
                available: 2
            })
        );
    }

    #[test]
    fn batch_uses_consecutive_seeds() {
        let vm = looped();
        assert!(generate_traces(&vm, 0, 5, 100).is_empty());
        let runs = generate_traces(&vm, 20, 5, 100);
        for (i, r) in runs.iter().enumerate() {
            assert_eq!(r.seed, 5 + i as u64);
            assert_eq!(*r, simulate_random(&vm, 5 + i as u64, 100));
        }
    }

    #[test]
    fn examples_and_exhaustion() {
        let vm = looped();
        let set = generate_examples(&vm, Classification::Positive, 5, 0, 1000, 100).unwrap();
        assert_eq!(set.positives.len(), 5);
        assert!(set.negatives.is_empty());
        assert!(set.attempts >= 5);
        assert_eq!(set.variants.values().sum::<usize>(), 5);

        // no end state at all: positives cannot be found
        let never = compile(&ProcessModel::new(1, [], [(0, "a".into(), 0)], 0, [], []).unwrap(), false);
        let err = generate_examples(&never, Classification::Positive, 1, 0, 50, 20).unwrap_err();
        assert_eq!(
            err,
            SimError::Exhausted {
                collected: 0,
                attempts: 50
            }
        );
    }

    #[test]
    fn no_sink_means_all_positive() {
        let vm = looped();
        for r in generate_traces(&vm, 200, 0, DEFAULT_MAX_STEPS) {
            if r.outcome == RunOutcome::Stopped {
                assert_eq!(classify(&r), Classification::Positive);
            }
        }
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&run(&["a", "b", "c"], vec![(3, Marker::End)])), Classification::Positive);
        assert_eq!(classify(&run(&["a"], vec![(1, Marker::Sink)])), Classification::Negative);
    }

    #[test]
    fn stats_arithmetic() {
        let runs = vec![
            run(&["a"], vec![(1, Marker::Sink)]),
            run(&["a", "b", "c"], vec![(3, Marker::End)]),
            run(&["a", "b", "c", "d", "e"], vec![(1, Marker::Sink)]),
        ];
        let s = stats(&runs);
        assert_eq!((s.generated, s.shortest, s.longest), (3, 1, 5));
        assert_eq!(s.average, 3.0);
        assert_eq!((s.positive_count, s.negative_count), (1, 2));
        assert_eq!(s.ratio_percent, 50.0);

        let empty = stats(&[]);
        assert_eq!(empty.generated + empty.shortest + empty.longest, 0);
        assert_eq!(empty.average, 0.0);
        assert_eq!(empty.ratio_percent, 0.0);
        assert!(empty.to_table().contains("Average trace length"));
    }

    #[test]
    fn display_interleaves_markers() {
        let r = run(&["a", "b"], vec![(1, Marker::Sink), (2, Marker::Sink)]);
        assert_eq!(r.to_string(), "a SINK b SINK");
    }

    #[test]
    fn normalize_spin_output() {
        let n = normalize_external_trace("Newreservation CheckIn END\n1 process created");
        assert_eq!(n.runs, vec![vec!["Newreservation".to_string(), "CheckIn".to_string()]]);
        assert_eq!(n.reached_end, vec![true]);

        let n = normalize_external_trace("warning: something\nspin: warning: other\n");
        assert!(n.runs.is_empty());
        assert_eq!(n.dropped_lines, 0);

        let a = normalize_external_trace("   a   b SINK  \n");
        let b = normalize_external_trace("a b SINK");
        assert_eq!(a, b);

        let n = normalize_external_trace("#processes: 1\n  timeout\na b\n3: proc 0 (model:1) terminates\n");
        assert_eq!(n.runs.len(), 1);
        assert_eq!(n.dropped_lines, 3);
    }
}
