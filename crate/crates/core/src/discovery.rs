//! k-tails state merging over a prefix tree acceptor.
//!
//! Positive traces mark their terminal PTA node `Accept`, negative traces
//! mark it `Reject`. Nodes whose k-tail signatures coincide are merged; a
//! merged graph that is nondeterministic is folded (targets of same-label
//! edges are merged recursively) until it is a DFA. Accepting classes
//! become end states and rejecting classes become sink states.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::automaton::{ProcessModel, StateId};
use crate::eventlog::Trace;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiscoveryError {
    #[error("sequence `{}` is labelled both positive and negative", .0.join(" "))]
    ConflictingLabel(Vec<String>),
    #[error("merged class {0} contains both accepting and rejecting nodes; raise k")]
    MarkConflict(usize),
    #[error("learned model disagrees with training trace `{}`", .trace.join(" "))]
    Inconsistent {
        model: Box<ProcessModel>,
        trace: Vec<String>,
    },
    #[error("sample file line {line}: {message}")]
    SampleSyntax { line: usize, message: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledSample {
    pub positives: Vec<Vec<String>>,
    pub negatives: Vec<Vec<String>>,
}

impl LabeledSample {
    pub fn from_traces(positives: &[Trace], negatives: &[Trace]) -> Self {
        Self {
            positives: positives.iter().map(|t| t.events.clone()).collect(),
            negatives: negatives.iter().map(|t| t.events.clone()).collect(),
        }
    }

    /// Parses the sample text format: one trace per line, events separated
    /// by whitespace. Lines after a `#negative` header are negatives; a
    /// `#positive` header switches back. Other `#` lines are comments.
    pub fn parse(text: &str) -> Result<Self, DiscoveryError> {
        let mut sample = Self::default();
        let mut negative = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(directive) = line.strip_prefix('#') {
                match directive.trim() {
                    "negative" => negative = true,
                    "positive" => negative = false,
                    d if d.starts_with("negative") || d.starts_with("positive") => {
                        return Err(DiscoveryError::SampleSyntax {
                            line: i + 1,
                            message: format!("unknown section header `#{d}`"),
                        })
                    }
                    _ => {}
                }
                continue;
            }
            let events = line.split_whitespace().map(String::from).collect();
            if negative {
                sample.negatives.push(events);
            } else {
                sample.positives.push(events);
            }
        }
        Ok(sample)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.positives {
            out.push_str(&t.join(" "));
            out.push('\n');
        }
        if !self.negatives.is_empty() {
            out.push_str("#negative\n");
            for t in &self.negatives {
                out.push_str(&t.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn max_len(&self) -> usize {
        self.positives
            .iter()
            .chain(&self.negatives)
            .map(Vec::len)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    None,
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtaNode {
    pub children: BTreeMap<String, usize>,
    pub mark: Mark,
}

/// Prefix tree acceptor. Node 0 is the root (empty prefix).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pta {
    nodes: Vec<PtaNode>,
}

impl Pta {
    pub fn nodes(&self) -> &[PtaNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> &PtaNode {
        &self.nodes[id]
    }

    /// Node reached by `word` from the root, if any.
    pub fn follow<S: AsRef<str>>(&self, word: &[S]) -> Option<usize> {
        word.iter().try_fold(0, |n, l| self.nodes[n].children.get(l.as_ref()).copied())
    }

    fn insert(&mut self, word: &[String], mark: Mark) -> Result<(), DiscoveryError> {
        let mut n = 0;
        for label in word {
            n = match self.nodes[n].children.get(label) {
                Some(&c) => c,
                None => {
                    self.nodes.push(PtaNode {
                        children: BTreeMap::new(),
                        mark: Mark::None,
                    });
                    let c = self.nodes.len() - 1;
                    self.nodes[n].children.insert(label.clone(), c);
                    c
                }
            };
        }
        match self.nodes[n].mark {
            Mark::None => self.nodes[n].mark = mark,
            m if m == mark => {}
            _ => return Err(DiscoveryError::ConflictingLabel(word.to_vec())),
        }
        Ok(())
    }

    fn alphabet(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .flat_map(|n| n.children.keys().cloned())
            .collect()
    }
}

pub fn build_pta(sample: &LabeledSample) -> Result<Pta, DiscoveryError> {
    let mut pta = Pta {
        nodes: vec![PtaNode {
            children: BTreeMap::new(),
            mark: Mark::None,
        }],
    };
    for word in &sample.positives {
        pta.insert(word, Mark::Accept)?;
    }
    for word in &sample.negatives {
        pta.insert(word, Mark::Reject)?;
    }
    Ok(pta)
}

/// The k-tail of a node: every continuation `w` with `|w| <= k` together
/// with the mark of the node it reaches (including `w = ε`).
pub type Signature = BTreeSet<(Vec<String>, Mark)>;

pub fn ktail_signature(pta: &Pta, node: usize, k: usize) -> Signature {
    let mut sig = Signature::new();
    let mut stack = vec![(node, Vec::new())];
    while let Some((n, w)) = stack.pop() {
        sig.insert((w.clone(), pta.nodes[n].mark));
        if w.len() < k {
            for (label, &c) in &pta.nodes[n].children {
                let mut next = w.clone();
                next.push(label.clone());
                stack.push((c, next));
            }
        }
    }
    sig
}

/// Equivalence classes over PTA nodes. Class ids follow the first node of
/// each class in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KtailPartition {
    pub k: usize,
    class_of: Vec<usize>,
}

impl KtailPartition {
    pub fn compute(pta: &Pta, k: usize) -> Self {
        let mut ids: HashMap<Signature, usize> = HashMap::new();
        let class_of = (0..pta.len())
            .map(|n| {
                let next = ids.len();
                *ids.entry(ktail_signature(pta, n, k)).or_insert(next)
            })
            .collect();
        Self { k, class_of }
    }

    /// Every node in its own class.
    pub fn identity(pta: &Pta) -> Self {
        Self {
            k: usize::MAX,
            class_of: (0..pta.len()).collect(),
        }
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.class_of[node]
    }

    pub fn class_count(&self) -> usize {
        self.class_of.iter().max().map_or(0, |m| m + 1)
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.class_count()];
        for (n, &c) in self.class_of.iter().enumerate() {
            out[c].push(n);
        }
        out
    }
}

/// The merged graph before determinization: possibly nondeterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientNfa {
    pub initial: usize,
    pub edges: BTreeSet<(usize, String, usize)>,
    pub accepting: BTreeSet<usize>,
}

impl QuotientNfa {
    pub fn new(pta: &Pta, partition: &KtailPartition) -> Self {
        let mut edges = BTreeSet::new();
        let mut accepting = BTreeSet::new();
        for (n, node) in pta.nodes.iter().enumerate() {
            let c = partition.class_of(n);
            if node.mark == Mark::Accept {
                accepting.insert(c);
            }
            for (label, &child) in &node.children {
                edges.insert((c, label.clone(), partition.class_of(child)));
            }
        }
        Self {
            initial: partition.class_of(0),
            edges,
            accepting,
        }
    }

    pub fn accepts<S: AsRef<str>>(&self, word: &[S]) -> bool {
        let mut current = BTreeSet::from([self.initial]);
        for label in word {
            current = self
                .edges
                .iter()
                .filter(|(s, l, _)| current.contains(s) && l == label.as_ref())
                .map(|(_, _, t)| *t)
                .collect();
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|s| self.accepting.contains(s))
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            let next = self.0[y];
            self.0[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        true
    }
}

/// Merges the classes of `partition`, folds nondeterminism away and builds
/// the resulting process model (normalized).
pub fn quotient(pta: &Pta, partition: &KtailPartition) -> Result<ProcessModel, DiscoveryError> {
    let classes = partition.class_count();
    let mut uf = UnionFind((0..classes).collect());
    loop {
        let mut changed = false;
        let mut targets: HashMap<(usize, &str), usize> = HashMap::new();
        for (n, node) in pta.nodes.iter().enumerate() {
            let src = uf.find(partition.class_of(n));
            for (label, &child) in &node.children {
                let dst = uf.find(partition.class_of(child));
                match targets.get(&(src, label.as_str())) {
                    Some(&prev) if uf.find(prev) != dst => {
                        uf.union(prev, dst);
                        changed = true;
                    }
                    Some(_) => {}
                    None => {
                        targets.insert((src, label.as_str()), dst);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // dense ids for the folded classes
    let mut dense: BTreeMap<usize, StateId> = BTreeMap::new();
    for c in 0..classes {
        let root = uf.find(c);
        let next = dense.len();
        dense.entry(root).or_insert(next);
    }
    let state_of = |uf: &mut UnionFind, n: usize| dense[&uf.find(partition.class_of(n))];

    let mut marks: BTreeMap<StateId, (bool, bool)> = BTreeMap::new();
    let mut edges = BTreeSet::new();
    for (n, node) in pta.nodes.iter().enumerate() {
        let s = state_of(&mut uf, n);
        let entry = marks.entry(s).or_default();
        match node.mark {
            Mark::Accept => entry.0 = true,
            Mark::Reject => entry.1 = true,
            Mark::None => {}
        }
        for (label, &child) in &node.children {
            edges.insert((s, label.clone(), state_of(&mut uf, child)));
        }
    }
    if let Some((&s, _)) = marks.iter().find(|(_, (a, r))| *a && *r) {
        return Err(DiscoveryError::MarkConflict(s));
    }
    let initial = state_of(&mut uf, 0);
    let end = marks.iter().filter(|(_, m)| m.0).map(|(s, _)| *s);
    let sink = marks.iter().filter(|(_, m)| m.1).map(|(s, _)| *s);
    ProcessModel::new(dense.len(), pta.alphabet(), edges, initial, end, sink)
        .map_err(|e| unreachable!("quotient produced an invalid model: {e}"))
}

/// Learns a process model from a labelled sample with k-tails.
pub fn discover(sample: &LabeledSample, k: usize) -> Result<ProcessModel, DiscoveryError> {
    let pta = build_pta(sample)?;
    let partition = KtailPartition::compute(&pta, k);
    let model = quotient(&pta, &partition)?;
    for word in &sample.positives {
        if !model.run(word).is_end() {
            return Err(DiscoveryError::Inconsistent {
                model: Box::new(model),
                trace: word.clone(),
            });
        }
    }
    for word in &sample.negatives {
        if model.run(word).is_end() {
            return Err(DiscoveryError::Inconsistent {
                model: Box::new(model),
                trace: word.clone(),
            });
        }
    }
    Ok(model)
}
