//! Explicit-state verification.
//!
//! LTL properties are checked on the product of the model with the
//! formula's Büchi automaton. A product state `(s, q)` means automaton
//! state `q` has already read the valuation of model state `s`. Runs that
//! stop or deadlock are extended by repeating their last state forever,
//! so every finite execution is also an infinite word.
//!
//! Only counters mentioned by the property are tracked, each saturating
//! one above the largest constant it is compared with (and at least at the
//! configured cap). Comparisons therefore evaluate exactly while the state
//! space stays finite.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{to_buchi, BuchiAutomaton, Cmp, LtlFormula, Valuation};
use crate::sim::{execute, SimError, SimulationRun};
use crate::vmodel::{Choice, Location, VarRef, VerificationModel, VmState};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("an assertion must not use temporal operators")]
    TemporalAssertion,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error("trail step {0} is not executable")]
    InvalidStep(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("trail line {line}: {message}")]
pub struct TrailError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrailStep {
    Take(String),
    Stop,
}

impl fmt::Display for TrailStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrailStep::Take(label) => write!(f, "TAKE {label}"),
            TrailStep::Stop => f.write_str("STOP"),
        }
    }
}

const CYCLE_MARK: &str = "# cycle starts here";

/// One step per line; a comment line marks where the cycle of a lasso
/// begins.
pub fn write_trail(trail: &[TrailStep], cycle_start: Option<usize>) -> String {
    let mut out = String::new();
    for (i, step) in trail.iter().enumerate() {
        if cycle_start == Some(i) {
            out.push_str(CYCLE_MARK);
            out.push('\n');
        }
        out.push_str(&step.to_string());
        out.push('\n');
    }
    if cycle_start == Some(trail.len()) {
        out.push_str(CYCLE_MARK);
        out.push('\n');
    }
    out
}

pub fn read_trail(text: &str) -> Result<(Vec<TrailStep>, Option<usize>), TrailError> {
    let mut steps = Vec::new();
    let mut cycle_start = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line == CYCLE_MARK {
            cycle_start = Some(steps.len());
        } else if line.is_empty() || line.starts_with('#') {
            continue;
        } else if line == "STOP" {
            steps.push(TrailStep::Stop);
        } else if let Some(label) = line.strip_prefix("TAKE ") {
            steps.push(TrailStep::Take(label.trim().to_string()));
        } else {
            return Err(TrailError {
                line: i + 1,
                message: format!("expected `TAKE <label>` or `STOP`, found `{line}`"),
            });
        }
    }
    Ok((steps, cycle_start))
}

/// Re-executes a trail. The run ends `Stopped` if the trail ends with
/// `STOP`, `Deadlock` if it ends in a block without options and
/// `StepLimit` otherwise.
pub fn replay(vm: &VerificationModel, trail: &[TrailStep]) -> Result<SimulationRun, ReplayError> {
    let mut pos = 0;
    let run = execute(vm, usize::MAX, 0, |_, options| {
        let Some(step) = trail.get(pos) else {
            return Ok(None);
        };
        let found = options.iter().position(|o| match (o, step) {
            (Choice::Take { label, .. }, TrailStep::Take(want)) => label == want,
            (Choice::Stop, TrailStep::Stop) => true,
            _ => false,
        });
        match found {
            Some(i) => {
                pos += 1;
                Ok(Some(i))
            }
            None => Err(SimError::InvalidChoice {
                index: pos,
                available: options.len(),
            }),
        }
    });
    match run {
        Ok(run) if pos == trail.len() => Ok(run),
        _ => Err(ReplayError::InvalidStep(pos)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Property {
    Ltl(LtlFormula),
    /// A state formula every reachable state must satisfy.
    Assert(LtlFormula),
    DeadlockOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Longest explored path, in steps.
    pub max_depth: usize,
    /// Minimum saturation bound for tracked counters.
    pub counter_cap: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_depth: 10_000,
            counter_cap: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trail: Vec<TrailStep>,
    /// Index into `trail` where the repeating part of a lasso begins.
    pub cycle_start: Option<usize>,
    pub run: SimulationRun,
    /// Valuations of the visited states, with tracked counters saturated.
    pub valuations: Vec<Valuation>,
    /// Index into `valuations` where the cycle begins; `None` means the
    /// last valuation repeats forever.
    pub valuation_cycle: Option<usize>,
    pub states_explored: usize,
}

impl Counterexample {
    /// The witnessed word as `(prefix, cycle)`.
    pub fn lasso(&self) -> (Vec<Valuation>, Vec<Valuation>) {
        let split = self
            .valuation_cycle
            .unwrap_or(self.valuations.len().saturating_sub(1));
        let (p, c) = self.valuations.split_at(split);
        (p.to_vec(), c.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    CounterexampleFound(Counterexample),
    NoCounterexample {
        states_explored: usize,
        max_depth_hit: bool,
    },
    AssertViolated(Counterexample),
    DeadlockFound(Counterexample),
}

impl Verdict {
    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::CounterexampleFound(c)
            | Verdict::AssertViolated(c)
            | Verdict::DeadlockFound(c) => Some(c),
            Verdict::NoCounterexample { .. } => None,
        }
    }

    pub fn states_explored(&self) -> usize {
        match self {
            Verdict::NoCounterexample {
                states_explored, ..
            } => *states_explored,
            v => v.counterexample().unwrap().states_explored,
        }
    }
}

type Atom = (VarRef, Cmp, i64);

fn resolve_atoms(vm: &VerificationModel, f: &LtlFormula) -> Result<(), VerifyError> {
    for p in f.atoms() {
        vm.resolve(&p.variable)
            .ok_or_else(|| VerifyError::UnknownVariable(p.variable.clone()))?;
    }
    Ok(())
}

/// Saturation bounds: zero (untracked) for counters the formula ignores.
fn caps_for(vm: &VerificationModel, f: &LtlFormula, min_cap: u64) -> Vec<u64> {
    let mut caps = vec![0u64; vm.counters().len()];
    for (name, max) in f.max_constants() {
        if let Some(VarRef::Counter(i)) = vm.resolve(name) {
            let needed = u64::try_from(max).map_or(1, |m| m.saturating_add(1));
            caps[i] = caps[i].max(min_cap.max(needed)).max(1);
        }
    }
    caps
}

fn valuation(vm: &VerificationModel, s: &VmState, caps: &[u64]) -> Valuation {
    let mut v = Valuation::new();
    v.insert(vm.variable_name(VarRef::EndState).to_string(), s.end_state as i64);
    v.insert(vm.variable_name(VarRef::SinkState).to_string(), s.sink_state as i64);
    for (i, cap) in caps.iter().enumerate() {
        if *cap > 0 {
            v.insert(vm.variable_name(VarRef::Counter(i)).to_string(), vm.value(s, VarRef::Counter(i)));
        }
    }
    v
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Option(usize),
    Stutter,
}

/// Successor model states; stop and deadlock states repeat themselves.
fn model_successors(vm: &VerificationModel, s: &VmState, caps: &[u64]) -> Vec<(Step, VmState)> {
    let n = vm.options(s).len();
    if n == 0 {
        return vec![(Step::Stutter, s.clone())];
    }
    (0..n)
        .map(|i| (Step::Option(i), vm.apply(s, i, caps).0))
        .collect()
}

fn trail_of(vm: &VerificationModel, states: &[&VmState], steps: &[Step]) -> Vec<TrailStep> {
    states
        .iter()
        .zip(steps)
        .filter_map(|(s, step)| match step {
            Step::Stutter => None,
            Step::Option(i) => Some(match &vm.options(s)[*i] {
                Choice::Take { label, .. } => TrailStep::Take(label.clone()),
                Choice::Stop => TrailStep::Stop,
            }),
        })
        .collect()
}

struct Product<'a> {
    vm: &'a VerificationModel,
    buchi: BuchiAutomaton,
    guards: Vec<Vec<Atom>>,
    out: Vec<Vec<usize>>,
    universal: Vec<bool>,
    caps: Vec<u64>,
    ids: HashMap<(VmState, usize), usize>,
    nodes: Vec<(VmState, usize)>,
    outer_seen: Vec<bool>,
    on_stack: Vec<bool>,
    inner_seen: Vec<bool>,
}

struct Frame {
    node: usize,
    succ: Vec<(Step, usize)>,
    next: usize,
    step_in: Option<Step>,
}

impl<'a> Product<'a> {
    fn new(vm: &'a VerificationModel, f: &LtlFormula, caps: Vec<u64>) -> Self {
        let buchi = to_buchi(f);
        let guards = buchi
            .edges
            .iter()
            .map(|e| {
                e.guard
                    .0
                    .iter()
                    .map(|p| (vm.resolve(&p.variable).unwrap(), p.cmp, p.constant))
                    .collect()
            })
            .collect();
        let mut out = vec![Vec::new(); buchi.state_count];
        for (i, e) in buchi.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        Self {
            vm,
            universal: buchi.universal_states(),
            buchi,
            guards,
            out,
            caps,
            ids: HashMap::new(),
            nodes: Vec::new(),
            outer_seen: Vec::new(),
            on_stack: Vec::new(),
            inner_seen: Vec::new(),
        }
    }

    fn intern(&mut self, key: (VmState, usize)) -> (usize, bool) {
        if let Some(&id) = self.ids.get(&key) {
            return (id, false);
        }
        let id = self.nodes.len();
        self.ids.insert(key.clone(), id);
        self.nodes.push(key);
        self.outer_seen.push(false);
        self.on_stack.push(false);
        self.inner_seen.push(false);
        (id, true)
    }

    fn guard_holds(&self, edge: usize, s: &VmState) -> bool {
        self.guards[edge]
            .iter()
            .all(|&(var, cmp, k)| cmp.holds(self.vm.value(s, var), k))
    }

    fn moves(&mut self, q: usize, s: VmState, step: Step, out: &mut Vec<(Step, usize)>) {
        for k in 0..self.out[q].len() {
            let e = self.out[q][k];
            if self.guard_holds(e, &s) {
                let to = self.buchi.edges[e].to;
                out.push((step, self.intern((s.clone(), to)).0));
            }
        }
    }

    fn initial(&mut self) -> Vec<usize> {
        let (s0, _) = self.vm.initial_state();
        let mut out = Vec::new();
        self.moves(self.buchi.initial, s0, Step::Stutter, &mut out);
        out.into_iter().map(|(_, n)| n).collect()
    }

    fn successors(&mut self, node: usize) -> Vec<(Step, usize)> {
        let (s, q) = self.nodes[node].clone();
        let mut out = Vec::new();
        for (step, t) in model_successors(self.vm, &s, &self.caps) {
            self.moves(q, t, step, &mut out);
        }
        out
    }

    fn is_universal(&self, node: usize) -> bool {
        self.universal[self.nodes[node].1]
    }

    fn is_accepting(&self, node: usize) -> bool {
        self.buchi.is_accepting(self.nodes[node].1)
    }

    fn frame(&mut self, node: usize, step_in: Option<Step>) -> Frame {
        Frame {
            node,
            succ: self.successors(node),
            next: 0,
            step_in,
        }
    }

    /// Builds the counterexample for the node path `path` (joined by
    /// `steps`), optionally closed by a final step back to `path[cycle]`.
    fn witness(&self, path: &[usize], steps: &[Step], cycle: Option<usize>) -> Counterexample {
        let states: Vec<&VmState> = path.iter().map(|&n| &self.nodes[n].0).collect();
        let trail = trail_of(self.vm, &states, steps);
        let cycle_start = cycle.map(|j| trail_of(self.vm, &states[..j], &steps[..j]).len());
        let run = replay(self.vm, &trail).expect("product paths are executable");
        Counterexample {
            trail,
            cycle_start,
            run,
            valuations: states.iter().map(|s| valuation(self.vm, s, &self.caps)).collect(),
            valuation_cycle: cycle,
            states_explored: self.nodes.len(),
        }
    }

    /// Looks for a path from the accepting `seed` (on top of the outer
    /// stack) back into the outer stack.
    fn inner(&mut self, seed: usize) -> Option<(Vec<usize>, Vec<Step>, usize)> {
        let mut stack = vec![self.frame(seed, None)];
        while let Some(top) = stack.last_mut() {
            if top.next == top.succ.len() {
                stack.pop();
                continue;
            }
            let (step, m) = top.succ[top.next];
            top.next += 1;
            if self.on_stack[m] {
                let nodes = stack[1..].iter().map(|f| f.node).collect();
                let mut steps: Vec<Step> = stack[1..].iter().map(|f| f.step_in.unwrap()).collect();
                steps.push(step);
                return Some((nodes, steps, m));
            }
            if !self.inner_seen[m] {
                self.inner_seen[m] = true;
                let frame = self.frame(m, Some(step));
                stack.push(frame);
            }
        }
        None
    }

    /// Nested depth-first search for an accepting lasso.
    fn search(&mut self, max_depth: usize) -> Verdict {
        let mut depth_hit = false;
        for init in self.initial() {
            if self.is_universal(init) {
                return Verdict::CounterexampleFound(self.witness(&[init], &[], None));
            }
            if self.outer_seen[init] {
                continue;
            }
            self.outer_seen[init] = true;
            self.on_stack[init] = true;
            let root = self.frame(init, None);
            let mut stack = vec![root];
            while let Some(top) = stack.last_mut() {
                if top.next < top.succ.len() {
                    let (step, m) = top.succ[top.next];
                    top.next += 1;
                    if stack.len() > max_depth {
                        depth_hit = true;
                        continue;
                    }
                    if self.is_universal(m) {
                        let mut path: Vec<usize> = stack.iter().map(|f| f.node).collect();
                        path.push(m);
                        let mut steps: Vec<Step> =
                            stack[1..].iter().map(|f| f.step_in.unwrap()).collect();
                        steps.push(step);
                        return Verdict::CounterexampleFound(self.witness(&path, &steps, None));
                    }
                    if !self.outer_seen[m] {
                        self.outer_seen[m] = true;
                        self.on_stack[m] = true;
                        let frame = self.frame(m, Some(step));
                        stack.push(frame);
                    }
                    continue;
                }
                let node = top.node;
                if self.is_accepting(node) {
                    if let Some((inner_nodes, inner_steps, target)) = self.inner(node) {
                        let mut path: Vec<usize> = stack.iter().map(|f| f.node).collect();
                        let mut steps: Vec<Step> =
                            stack[1..].iter().map(|f| f.step_in.unwrap()).collect();
                        let j = path.iter().position(|&n| n == target).unwrap();
                        path.extend(inner_nodes);
                        steps.extend(inner_steps);
                        return Verdict::CounterexampleFound(self.witness(&path, &steps, Some(j)));
                    }
                }
                self.on_stack[node] = false;
                stack.pop();
            }
        }
        Verdict::NoCounterexample {
            states_explored: self.nodes.len(),
            max_depth_hit: depth_hit,
        }
    }
}

/// Breadth-first search for a reachable state satisfying `bad`.
fn bfs(
    vm: &VerificationModel,
    caps: &[u64],
    max_depth: usize,
    bad: impl Fn(&VmState) -> bool,
) -> Result<Counterexample, (usize, bool)> {
    let (s0, _) = vm.initial_state();
    let mut ids: HashMap<VmState, usize> = HashMap::from([(s0.clone(), 0)]);
    // (state, parent, step from parent, depth)
    let mut nodes: Vec<(VmState, usize, Step, usize)> = vec![(s0, 0, Step::Stutter, 0)];
    let mut queue = VecDeque::from([0usize]);
    let mut depth_hit = false;
    let witness = |nodes: &[(VmState, usize, Step, usize)], mut n: usize| {
        let mut path = vec![n];
        while n != 0 {
            n = nodes[n].1;
            path.push(n);
        }
        path.reverse();
        let states: Vec<&VmState> = path.iter().map(|&n| &nodes[n].0).collect();
        let steps: Vec<Step> = path[1..].iter().map(|&n| nodes[n].2).collect();
        let trail = trail_of(vm, &states, &steps);
        Counterexample {
            run: replay(vm, &trail).expect("search paths are executable"),
            trail,
            cycle_start: None,
            valuations: states.iter().map(|s| valuation(vm, s, caps)).collect(),
            valuation_cycle: None,
            states_explored: nodes.len(),
        }
    };
    if bad(&nodes[0].0) {
        return Ok(witness(&nodes, 0));
    }
    while let Some(n) = queue.pop_front() {
        let (s, _, _, depth) = nodes[n].clone();
        if vm.options(&s).is_empty() {
            continue;
        }
        if depth >= max_depth {
            depth_hit = true;
            continue;
        }
        for (step, t) in model_successors(vm, &s, caps) {
            if ids.contains_key(&t) {
                continue;
            }
            let id = nodes.len();
            ids.insert(t.clone(), id);
            let is_bad = bad(&t);
            nodes.push((t, n, step, depth + 1));
            if is_bad {
                return Ok(witness(&nodes, id));
            }
            queue.push_back(id);
        }
    }
    Err((nodes.len(), depth_hit))
}

/// Checks `property` on every execution of `vm`.
///
/// For [`Property::Ltl`] a counterexample is an execution *satisfying*
/// the formula; negate it first to search for violations instead.
pub fn verify(
    vm: &VerificationModel,
    property: &Property,
    options: &VerifyOptions,
) -> Result<Verdict, VerifyError> {
    let max_depth = options.max_depth.max(1);
    let no_cx = |(states_explored, max_depth_hit)| Verdict::NoCounterexample {
        states_explored,
        max_depth_hit,
    };
    Ok(match property {
        Property::Ltl(f) => {
            resolve_atoms(vm, f)?;
            let caps = caps_for(vm, f, options.counter_cap);
            let mut product = Product::new(vm, f, caps);
            product.search(max_depth)
        }
        Property::Assert(f) => {
            if !f.is_propositional() {
                return Err(VerifyError::TemporalAssertion);
            }
            resolve_atoms(vm, f)?;
            let caps = caps_for(vm, f, options.counter_cap);
            let holds = |s: &VmState| {
                f.holds_now(&|name| vm.resolve(name).map(|v| vm.value(s, v)))
                    .unwrap_or(false)
            };
            match bfs(vm, &caps, max_depth, |s| !holds(s)) {
                Ok(cx) => Verdict::AssertViolated(cx),
                Err(e) => no_cx(e),
            }
        }
        Property::DeadlockOnly => {
            let caps = vec![0; vm.counters().len()];
            let dead = |s: &VmState| {
                matches!(s.location, Location::Block(_)) && vm.options(s).is_empty()
            };
            match bfs(vm, &caps, max_depth, dead) {
                Ok(cx) => Verdict::DeadlockFound(cx),
                Err(e) => no_cx(e),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::ProcessModel;
    use crate::ltl::{eval_ltl, parse_ltl};
    use crate::sim::RunOutcome;
    use crate::vmodel::{compile, Marker};

    fn ltl(text: &str) -> Property {
        Property::Ltl(parse_ltl(text).unwrap())
    }

    fn single_end() -> VerificationModel {
        compile(&ProcessModel::new(1, [], [], 0, [0], []).unwrap(), true)
    }

    /// q0 -a-> q0, q0 -b-> q1 (end), q1 -c-> q2 (sink), q2 -c-> q2
    fn small() -> VerificationModel {
        compile(
            &ProcessModel::new(
                3,
                [],
                [
                    (0, "a".into(), 0),
                    (0, "b".into(), 1),
                    (1, "c".into(), 2),
                    (2, "c".into(), 2),
                ],
                0,
                [1],
                [2],
            )
            .unwrap(),
            true,
        )
    }

    fn check(vm: &VerificationModel, text: &str) -> Verdict {
        let f = parse_ltl(text).unwrap();
        let v = verify(vm, &Property::Ltl(f.clone()), &VerifyOptions::default()).unwrap();
        if let Some(cx) = v.counterexample() {
            let (p, c) = cx.lasso();
            assert!(eval_ltl(&f, &p, &c), "{text}: witness does not satisfy the formula");
            assert_eq!(replay(vm, &cx.trail).unwrap(), cx.run);
        }
        v
    }

    #[test]
    fn tautology_gives_empty_trail() {
        for vm in [single_end(), small()] {
            let v = check(&vm, "<> (0 == 0)");
            let cx = v.counterexample().unwrap();
            assert!(matches!(v, Verdict::CounterexampleFound(_)));
            assert!(cx.trail.is_empty());
        }
    }

    #[test]
    fn reaching_end_is_witnessed() {
        let v = check(&small(), "<> (end_state == 1)");
        let cx = v.counterexample().unwrap();
        assert!(cx.run.reached_end());
        assert_eq!(cx.run.final_vars.end_state, 1);
    }

    #[test]
    fn counters_in_witnesses() {
        let v = check(&small(), "<> (end_state == 1 && a == 3)");
        let cx = v.counterexample().unwrap();
        assert_eq!(cx.run.final_vars.counters["a"], 3);

        let v = check(&small(), "<> (a == 3 && c == 2)");
        assert_eq!(v.counterexample().unwrap().run.final_vars.counters["c"], 2);
    }

    #[test]
    fn lasso_witnesses() {
        // staying in the a-loop forever
        let v = check(&small(), "[] (end_state == 0)");
        let cx = v.counterexample().unwrap();
        assert!(cx.cycle_start.is_some());
        assert!(cx.trail.iter().all(|s| *s == TrailStep::Take("a".into())));

        // must pass the end state and then stay in the sink
        let v = check(&small(), "<> (end_state == 1) && [] <> (c >= 9)");
        assert!(v.counterexample().is_some());
    }

    #[test]
    fn impossible_properties() {
        let v = check(&small(), "<> (end_state == 1 && a == 1 && sink_state == 1 && c == 0)");
        assert!(matches!(
            v,
            Verdict::NoCounterexample {
                max_depth_hit: false,
                ..
            }
        ));
        let v = check(&single_end(), "<> (sink_state == 1)");
        assert!(v.counterexample().is_none());
    }

    #[test]
    fn stop_is_stuttered() {
        // the only run stops immediately, so end_state stays 1 forever
        let v = check(&single_end(), "[] (end_state == 1)");
        assert!(v.counterexample().is_some());
    }

    #[test]
    fn unknown_variables_are_rejected() {
        let err = verify(&small(), &ltl("<> (nope == 1)"), &VerifyOptions::default()).unwrap_err();
        assert_eq!(err, VerifyError::UnknownVariable("nope".into()));
        let plain = compile(&ProcessModel::new(1, [], [(0, "a".into(), 0)], 0, [0], []).unwrap(), false);
        assert!(verify(&plain, &ltl("<> (a == 1)"), &VerifyOptions::default()).is_err());
    }

    #[test]
    fn assertions() {
        let vm = small();
        let opts = VerifyOptions::default();
        let v = verify(&vm, &Property::Assert(parse_ltl("end_state == 0").unwrap()), &opts).unwrap();
        let Verdict::AssertViolated(cx) = v else {
            panic!("expected a violation");
        };
        assert_eq!(cx.trail, vec![TrailStep::Take("b".into())]);
        assert_eq!(cx.run.final_vars.end_state, 1);

        let v = verify(&vm, &Property::Assert(parse_ltl("a <= 100").unwrap()), &opts).unwrap();
        assert!(matches!(v, Verdict::AssertViolated(_)));
        let v = verify(&vm, &Property::Assert(parse_ltl("a >= 0").unwrap()), &opts).unwrap();
        assert!(matches!(v, Verdict::NoCounterexample { .. }));
        assert_eq!(
            verify(&vm, &Property::Assert(parse_ltl("<> a == 0").unwrap()), &opts),
            Err(VerifyError::TemporalAssertion)
        );
    }

    #[test]
    fn deadlocks() {
        let dead = compile(
            &ProcessModel::new(3, [], [(0, "a".into(), 1), (0, "b".into(), 2)], 0, [2], []).unwrap(),
            false,
        );
        let v = verify(&dead, &Property::DeadlockOnly, &VerifyOptions::default()).unwrap();
        let Verdict::DeadlockFound(cx) = v else {
            panic!("expected a deadlock");
        };
        assert_eq!(cx.trail, vec![TrailStep::Take("a".into())]);
        assert_eq!(cx.run.outcome, RunOutcome::Deadlock);

        let v = verify(&small(), &Property::DeadlockOnly, &VerifyOptions::default()).unwrap();
        assert!(v.counterexample().is_none());
    }

    #[test]
    fn depth_bound_is_reported() {
        let opts = VerifyOptions {
            max_depth: 2,
            counter_cap: 8,
        };
        let v = verify(&small(), &ltl("<> (a == 5)"), &opts).unwrap();
        assert!(matches!(v, Verdict::NoCounterexample { max_depth_hit: true, .. }));
        let v = verify(&small(), &ltl("<> (a == 5)"), &VerifyOptions::default()).unwrap();
        assert!(v.counterexample().is_some());
    }

    #[test]
    fn replay_runs() {
        let r = replay(&single_end(), &[]).unwrap();
        assert_eq!(r.markers, vec![(0, Marker::End)]);
        assert_eq!(r.outcome, RunOutcome::StepLimit);
        let r = replay(&single_end(), &[TrailStep::Stop]).unwrap();
        assert_eq!(r.outcome, RunOutcome::Stopped);

        let trail = [TrailStep::Take("a".into()), TrailStep::Take("c".into())];
        assert_eq!(replay(&small(), &trail), Err(ReplayError::InvalidStep(1)));
        let trail = [TrailStep::Stop, TrailStep::Stop];
        assert_eq!(replay(&single_end(), &trail), Err(ReplayError::InvalidStep(1)));
    }

    #[test]
    fn trail_text_round_trip() {
        let trail = vec![
            TrailStep::Take("Check In".into()),
            TrailStep::Take("b".into()),
            TrailStep::Stop,
        ];
        for cycle in [None, Some(0), Some(2), Some(3)] {
            let text = write_trail(&trail, cycle);
            assert_eq!(read_trail(&text).unwrap(), (trail.clone(), cycle));
        }
        assert_eq!(read_trail("# note\n\nTAKE x\n").unwrap().0, vec![TrailStep::Take("x".into())]);
        assert_eq!(read_trail("TAKE x\nJUMP\n").unwrap_err().line, 2);
    }
}
