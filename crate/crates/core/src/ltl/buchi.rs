//! LTL to Büchi translation.
//!
//! The formula is put in negation normal form and expanded with the
//! on-the-fly tableau of Gerth, Peled, Vardi and Wolper. The resulting
//! generalized automaton is degeneralized with a round-robin counter,
//! reduced by merging bisimilar states, and trimmed of states from which
//! no accepting cycle is reachable.
//!
//! Guards sit on edges and are read on arrival: an edge `q -g-> q'` can
//! consume a letter `v` iff `v` satisfies `g`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::{eval::Valuation, LtlFormula, Predicate};

/// Conjunction of predicates; the empty guard is `true`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guard(pub BTreeSet<Predicate>);

impl Guard {
    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn holds(&self, lookup: impl Fn(&str) -> Option<i64>) -> bool {
        self.0
            .iter()
            .all(|p| lookup(&p.variable).is_some_and(|v| p.holds(v)))
    }

    pub fn holds_on(&self, v: &Valuation) -> bool {
        self.holds(|name| v.get(name).copied())
    }

    /// Whether some integer assignment satisfies every conjunct.
    pub fn is_satisfiable(&self) -> bool {
        use super::Cmp::*;
        let mut by_var: BTreeMap<&str, Vec<&Predicate>> = BTreeMap::new();
        for p in &self.0 {
            by_var.entry(&p.variable).or_default().push(p);
        }
        by_var.values().all(|preds| {
            let (mut lo, mut hi) = (i64::MIN as i128, i64::MAX as i128);
            let mut excluded = BTreeSet::new();
            for p in preds {
                let c = p.constant as i128;
                match p.cmp {
                    Eq => {
                        lo = lo.max(c);
                        hi = hi.min(c);
                    }
                    Ne => {
                        excluded.insert(c);
                    }
                    Lt => hi = hi.min(c - 1),
                    Le => hi = hi.min(c),
                    Gt => lo = lo.max(c + 1),
                    Ge => lo = lo.max(c),
                }
            }
            lo <= hi && hi - lo + 1 > excluded.range(lo..=hi).count() as i128
        })
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_true() {
            return f.write_str("true");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BuchiEdge {
    pub from: usize,
    pub guard: Guard,
    pub to: usize,
}

/// States are numbered breadth-first from the initial state (always 0);
/// edges are sorted by `(from, guard, to)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiAutomaton {
    pub state_count: usize,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    pub edges: Vec<BuchiEdge>,
}

impl BuchiAutomaton {
    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting.contains(&q)
    }

    pub fn out_edges(&self, q: usize) -> impl Iterator<Item = &BuchiEdge> {
        let start = self.edges.partition_point(|e| e.from < q);
        self.edges[start..].iter().take_while(move |e| e.from == q)
    }

    /// States from which every infinite word is accepted: accepting states
    /// with a `true` self-loop, closed backwards under `true` edges.
    pub fn universal_states(&self) -> Vec<bool> {
        let mut universal = vec![false; self.state_count];
        for e in &self.edges {
            if e.from == e.to && e.guard.is_true() && self.is_accepting(e.from) {
                universal[e.from] = true;
            }
        }
        loop {
            let mut changed = false;
            for e in &self.edges {
                if e.guard.is_true() && universal[e.to] && !universal[e.from] {
                    universal[e.from] = true;
                    changed = true;
                }
            }
            if !changed {
                return universal;
            }
        }
    }
}

/// Negation normal form. Negated comparisons are absorbed by flipping the
/// comparator, so literals are always positive predicates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Nnf {
    True,
    False,
    Lit(Predicate),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Next(Box<Nnf>),
    Until(Box<Nnf>, Box<Nnf>),
    Release(Box<Nnf>, Box<Nnf>),
}

fn and(a: Nnf, b: Nnf) -> Nnf {
    match (a, b) {
        (Nnf::False, _) | (_, Nnf::False) => Nnf::False,
        (Nnf::True, x) | (x, Nnf::True) => x,
        (a, b) if a == b => a,
        (a, b) => Nnf::And(Box::new(a), Box::new(b)),
    }
}

fn or(a: Nnf, b: Nnf) -> Nnf {
    match (a, b) {
        (Nnf::True, _) | (_, Nnf::True) => Nnf::True,
        (Nnf::False, x) | (x, Nnf::False) => x,
        (a, b) if a == b => a,
        (a, b) => Nnf::Or(Box::new(a), Box::new(b)),
    }
}

fn until(a: Nnf, b: Nnf) -> Nnf {
    match b {
        Nnf::True | Nnf::False => b,
        b => Nnf::Until(Box::new(a), Box::new(b)),
    }
}

fn release(a: Nnf, b: Nnf) -> Nnf {
    match b {
        Nnf::True | Nnf::False => b,
        b => Nnf::Release(Box::new(a), Box::new(b)),
    }
}

fn nnf(f: &LtlFormula, neg: bool) -> Nnf {
    use LtlFormula as F;
    match f {
        F::True => if neg { Nnf::False } else { Nnf::True },
        F::False => if neg { Nnf::True } else { Nnf::False },
        F::Atom(p) => Nnf::Lit(if neg { p.negated() } else { p.clone() }),
        F::Not(a) => nnf(a, !neg),
        F::And(a, b) if neg => or(nnf(a, true), nnf(b, true)),
        F::And(a, b) => and(nnf(a, false), nnf(b, false)),
        F::Or(a, b) if neg => and(nnf(a, true), nnf(b, true)),
        F::Or(a, b) => or(nnf(a, false), nnf(b, false)),
        F::Implies(a, b) if neg => and(nnf(a, false), nnf(b, true)),
        F::Implies(a, b) => or(nnf(a, true), nnf(b, false)),
        F::Next(a) => Nnf::Next(Box::new(nnf(a, neg))),
        F::Finally(a) if neg => release(Nnf::False, nnf(a, true)),
        F::Finally(a) => until(Nnf::True, nnf(a, false)),
        F::Globally(a) if neg => until(Nnf::True, nnf(a, true)),
        F::Globally(a) => release(Nnf::False, nnf(a, false)),
        F::Until(a, b) if neg => release(nnf(a, true), nnf(b, true)),
        F::Until(a, b) => until(nnf(a, false), nnf(b, false)),
    }
}

fn untils(f: &Nnf, out: &mut BTreeSet<Nnf>) {
    match f {
        Nnf::True | Nnf::False | Nnf::Lit(_) => {}
        Nnf::Next(a) => untils(a, out),
        Nnf::Until(a, b) => {
            out.insert(f.clone());
            untils(a, out);
            untils(b, out);
        }
        Nnf::And(a, b) | Nnf::Or(a, b) | Nnf::Release(a, b) => {
            untils(a, out);
            untils(b, out);
        }
    }
}

struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Nnf>,
    old: BTreeSet<Nnf>,
    next: BTreeSet<Nnf>,
}

impl Pending {
    fn with_new(&self, extra: &[&Nnf], next: Option<&Nnf>) -> Pending {
        let mut p = Pending {
            incoming: self.incoming.clone(),
            new: self.new.clone(),
            old: self.old.clone(),
            next: self.next.clone(),
        };
        for f in extra {
            if !p.old.contains(*f) {
                p.new.insert((*f).clone());
            }
        }
        if let Some(n) = next {
            p.next.insert(n.clone());
        }
        p
    }
}

struct Tableau {
    /// Node `i + 1` of the graph; 0 is the virtual initial node.
    nodes: Vec<Pending>,
}

fn tableau(root: Nnf) -> Tableau {
    let mut nodes: Vec<Pending> = Vec::new();
    let mut work = vec![Pending {
        incoming: [0].into(),
        new: [root].into(),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    while let Some(mut n) = work.pop() {
        let Some(eta) = n.new.pop_first() else {
            if let Some(existing) = nodes
                .iter_mut()
                .find(|d| d.old == n.old && d.next == n.next)
            {
                existing.incoming.extend(n.incoming);
            } else {
                nodes.push(n);
                let id = nodes.len();
                let n = &nodes[id - 1];
                work.push(Pending {
                    incoming: [id].into(),
                    new: n.next.clone(),
                    old: BTreeSet::new(),
                    next: BTreeSet::new(),
                });
            }
            continue;
        };
        if n.old.contains(&eta) {
            work.push(n);
            continue;
        }
        match &eta {
            Nnf::False => {}
            Nnf::True => {
                n.old.insert(eta);
                work.push(n);
            }
            Nnf::Lit(p) => {
                if !n.old.contains(&Nnf::Lit(p.negated())) {
                    n.old.insert(eta);
                    work.push(n);
                }
            }
            Nnf::And(a, b) => {
                let mut m = n.with_new(&[&**a, &**b], None);
                m.old.insert(eta);
                work.push(m);
            }
            Nnf::Next(a) => {
                let mut m = n.with_new(&[], Some(&**a));
                m.old.insert(eta);
                work.push(m);
            }
            Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                let (mut m1, mut m2) = match &eta {
                    Nnf::Or(..) => (n.with_new(&[&**a], None), n.with_new(&[&**b], None)),
                    Nnf::Until(..) => (n.with_new(&[&**a], Some(&eta)), n.with_new(&[&**b], None)),
                    _ => (n.with_new(&[&**b], Some(&eta)), n.with_new(&[&**a, &**b], None)),
                };
                m1.old.insert(eta.clone());
                m2.old.insert(eta);
                work.push(m2);
                work.push(m1);
            }
        }
    }
    Tableau { nodes }
}

fn literal_guard(old: &BTreeSet<Nnf>) -> Guard {
    Guard(
        old.iter()
            .filter_map(|f| match f {
                Nnf::Lit(p) => Some(p.clone()),
                _ => None,
            })
            .collect(),
    )
}

/// Builds an automaton whose language is the set of words satisfying `f`.
pub fn to_buchi(f: &LtlFormula) -> BuchiAutomaton {
    let root = nnf(f, false);
    let mut goals = BTreeSet::new();
    untils(&root, &mut goals);
    let goals: Vec<(Nnf, Nnf)> = goals
        .into_iter()
        .map(|u| match u {
            Nnf::Until(_, ref b) => (u.clone(), (**b).clone()),
            _ => unreachable!(),
        })
        .collect();
    let t = tableau(root);

    // generalized acceptance: F_i holds the nodes that either do not
    // promise goal i or fulfil it
    let node_count = t.nodes.len() + 1;
    let in_f = |node: usize, i: usize| -> bool {
        if node == 0 {
            return false;
        }
        let old = &t.nodes[node - 1].old;
        let (u, b) = &goals[i];
        !old.contains(u) || old.contains(b)
    };
    let mut succ: Vec<Vec<(Guard, usize)>> = vec![Vec::new(); node_count];
    for (i, n) in t.nodes.iter().enumerate() {
        let guard = literal_guard(&n.old);
        if !guard.is_satisfiable() {
            continue;
        }
        for &from in &n.incoming {
            succ[from].push((guard.clone(), i + 1));
        }
    }

    // degeneralize over (node, counter)
    let k = goals.len();
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    ids.insert((0, 0), 0);
    let mut edges = Vec::new();
    let mut accepting = BTreeSet::new();
    while let Some((node, i)) = queue.pop_front() {
        let id = ids[&(node, i)];
        if node != 0 && (k == 0 || (i == k - 1 && in_f(node, i))) {
            accepting.insert(id);
        }
        let j = if k > 0 && in_f(node, i) { (i + 1) % k } else { i };
        for (guard, to) in &succ[node] {
            let next = ids.len();
            let to_id = *ids.entry((*to, j)).or_insert_with(|| {
                queue.push_back((*to, j));
                next
            });
            edges.push(BuchiEdge {
                from: id,
                guard: guard.clone(),
                to: to_id,
            });
        }
    }
    let raw = BuchiAutomaton {
        state_count: ids.len(),
        initial: 0,
        accepting,
        edges,
    };
    normalize(trim(&reduce(&raw)))
}

/// Merges bisimilar states: states with the same acceptance flag whose
/// edges lead, guard for guard, into the same classes.
fn reduce(b: &BuchiAutomaton) -> BuchiAutomaton {
    let mut class: Vec<usize> = (0..b.state_count)
        .map(|q| b.is_accepting(q) as usize)
        .collect();
    let mut count = class.iter().collect::<BTreeSet<_>>().len();
    loop {
        let mut sigs: BTreeMap<(usize, BTreeSet<(Guard, usize)>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..b.state_count)
            .map(|q| {
                let sig = (
                    class[q],
                    b.out_edges(q).map(|e| (e.guard.clone(), class[e.to])).collect(),
                );
                let n = sigs.len();
                *sigs.entry(sig).or_insert(n)
            })
            .collect();
        let new_count = sigs.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let edges: BTreeSet<BuchiEdge> = b
        .edges
        .iter()
        .map(|e| BuchiEdge {
            from: class[e.from],
            guard: e.guard.clone(),
            to: class[e.to],
        })
        .collect();
    BuchiAutomaton {
        state_count: count,
        initial: class[b.initial],
        accepting: b.accepting.iter().map(|&q| class[q]).collect(),
        edges: edges.into_iter().collect(),
    }
}

fn reachable(from: usize, adj: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![from];
    while let Some(q) = stack.pop() {
        for &r in &adj[q] {
            if !seen[r] {
                seen[r] = true;
                stack.push(r);
            }
        }
    }
    seen
}

/// Drops states that cannot reach an accepting cycle. The initial state
/// is kept even if the language is empty.
fn trim(b: &BuchiAutomaton) -> BuchiAutomaton {
    let n = b.state_count;
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for e in &b.edges {
        fwd[e.from].push(e.to);
        bwd[e.to].push(e.from);
    }
    let mut live = vec![false; n];
    for &a in &b.accepting {
        // a lies on a cycle iff it can reach itself in one or more steps
        if reachable(a, &fwd)[a] {
            live[a] = true;
            for (q, r) in reachable(a, &bwd).into_iter().enumerate() {
                live[q] |= r;
            }
        }
    }
    BuchiAutomaton {
        state_count: n,
        initial: b.initial,
        accepting: b.accepting.iter().copied().filter(|&q| live[q]).collect(),
        edges: b
            .edges
            .iter()
            .filter(|e| live[e.from] && live[e.to])
            .cloned()
            .collect(),
    }
}

/// Renumbers reachable states breadth-first from the initial state,
/// following edges in sorted order.
fn normalize(b: BuchiAutomaton) -> BuchiAutomaton {
    let mut order = vec![usize::MAX; b.state_count];
    order[b.initial] = 0;
    let mut queue = VecDeque::from([b.initial]);
    let mut count = 1;
    while let Some(q) = queue.pop_front() {
        for e in b.out_edges(q) {
            if order[e.to] == usize::MAX {
                order[e.to] = count;
                count += 1;
                queue.push_back(e.to);
            }
        }
    }
    let mut edges: Vec<BuchiEdge> = b
        .edges
        .iter()
        .filter(|e| order[e.from] != usize::MAX)
        .map(|e| BuchiEdge {
            from: order[e.from],
            guard: e.guard.clone(),
            to: order[e.to],
        })
        .collect();
    edges.sort();
    BuchiAutomaton {
        state_count: count,
        initial: 0,
        accepting: b
            .accepting
            .iter()
            .filter(|&&q| order[q] != usize::MAX)
            .map(|&q| order[q])
            .collect(),
        edges,
    }
}

/// Whether `b` accepts the word `prefix · cycle^ω`.
pub fn accepts_lasso(b: &BuchiAutomaton, prefix: &[Valuation], cycle: &[Valuation]) -> bool {
    assert!(!cycle.is_empty(), "the cycle of a lasso must be non-empty");
    let word: Vec<&Valuation> = prefix.iter().chain(cycle).collect();
    let len = word.len();
    let next_pos = |i: usize| if i + 1 < len { i + 1 } else { prefix.len() };
    // node (i, q): q has consumed letter i
    let index = |i: usize, q: usize| i * b.state_count + q;
    let mut adj = vec![Vec::new(); len * b.state_count];
    for i in 0..len {
        let j = next_pos(i);
        for e in &b.edges {
            if e.guard.holds_on(word[j]) {
                adj[index(i, e.from)].push(index(j, e.to));
            }
        }
    }
    let mut start = vec![false; adj.len()];
    for e in b.out_edges(b.initial) {
        if e.guard.holds_on(word[0]) {
            start[index(0, e.to)] = true;
        }
    }
    let mut seen = start.clone();
    let mut stack: Vec<usize> = (0..adj.len()).filter(|&x| start[x]).collect();
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..adj.len()).any(|x| seen[x] && b.is_accepting(x % b.state_count) && reachable(x, &adj)[x])
}
