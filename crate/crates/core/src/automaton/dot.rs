//! Graphviz DOT reading and writing for process models.
//!
//! Role conventions:
//! - the initial state is the target of an edge leaving a `shape=point`
//!   node (or, failing that, of an edge drawn with `color=blue`);
//! - end states are `shape=doublecircle`;
//! - sink states are filled grey (`style=filled, fillcolor=grey`);
//! - every other edge carries its event in `label`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::{ModelError, ProcessModel, StateId};

const START_NODE: &str = "__start";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DotError {
    #[error("no initial state marker (point node or blue edge) found")]
    NoInitial,
    #[error("nondeterministic transitions from `{state}` on `{label}`")]
    Nondeterministic { state: String, label: String },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(super) fn to_dot(model: &ProcessModel) -> String {
    let mut out = String::new();
    out.push_str("digraph process_model {\n");
    out.push_str("    rankdir=LR;\n");
    let _ = writeln!(out, "    {START_NODE} [shape=point];");
    let _ = writeln!(
        out,
        "    {START_NODE} -> {} [color=blue];",
        ProcessModel::state_name(model.initial())
    );
    for s in model.states() {
        let name = ProcessModel::state_name(s);
        if model.is_end(s) {
            let _ = writeln!(out, "    {name} [shape=doublecircle];");
        } else if model.is_sink(s) {
            let _ = writeln!(out, "    {name} [shape=circle, style=filled, fillcolor=grey];");
        } else {
            let _ = writeln!(out, "    {name} [shape=circle];");
        }
    }
    for (s, label, t) in model.edges() {
        let _ = writeln!(
            out,
            "    {} -> {} [label=\"{}\"];",
            ProcessModel::state_name(s),
            ProcessModel::state_name(t),
            escape(label)
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    Arrow,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Eq,
    Comma,
    Semi,
}

fn parse_error(line: usize, message: impl Into<String>) -> DotError {
    DotError::ParseError {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, DotError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut at_line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
            at_line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // `#` preprocessor-style lines are comments in DOT
        if c == '#' && at_line_start {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        at_line_start = false;
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let start = line;
            i += 2;
            loop {
                match chars.get(i) {
                    None => return Err(parse_error(start, "unterminated comment")),
                    Some('*') if chars.get(i + 1) == Some(&'/') => {
                        i += 2;
                        break;
                    }
                    Some('\n') => line += 1,
                    _ => {}
                }
                i += 1;
            }
            continue;
        }
        let single = match c {
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '=' => Some(Tok::Eq),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            toks.push((tok, line));
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            toks.push((Tok::Arrow, line));
            i += 2;
            continue;
        }
        if c == '"' {
            let start = line;
            let mut value = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(parse_error(start, "unterminated string")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if matches!(chars.get(i + 1), Some('"') | Some('\\')) => {
                        value.push(chars[i + 1]);
                        i += 2;
                        continue;
                    }
                    Some(&ch) => {
                        if ch == '\n' {
                            line += 1;
                        }
                        value.push(ch);
                    }
                }
                i += 1;
            }
            toks.push((Tok::Id(value), start));
            continue;
        }
        if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' {
            let mut value = String::new();
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.' || chars[i] == '-')
            {
                if chars[i] == '-' && chars.get(i + 1) == Some(&'>') {
                    break;
                }
                value.push(chars[i]);
                i += 1;
            }
            toks.push((Tok::Id(value), line));
            continue;
        }
        return Err(parse_error(line, format!("unexpected character `{c}`")));
    }
    Ok(toks)
}

type Attrs = BTreeMap<String, String>;

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l)| *l)
            .unwrap_or(1)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), DotError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => Err(parse_error(line, format!("expected {tok:?}, found {other:?}"))),
        }
    }

    fn id(&mut self) -> Result<String, DotError> {
        let line = self.line();
        match self.next() {
            Some(Tok::Id(s)) => Ok(s),
            other => Err(parse_error(line, format!("expected identifier, found {other:?}"))),
        }
    }

    fn attr_lists(&mut self) -> Result<Attrs, DotError> {
        let mut attrs = Attrs::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.next();
            loop {
                match self.peek() {
                    Some(Tok::RBracket) => {
                        self.next();
                        break;
                    }
                    Some(Tok::Comma) | Some(Tok::Semi) => {
                        self.next();
                    }
                    _ => {
                        let key = self.id()?;
                        let value = if self.peek() == Some(&Tok::Eq) {
                            self.next();
                            self.id()?
                        } else {
                            "true".to_string()
                        };
                        attrs.insert(key.to_ascii_lowercase(), value);
                    }
                }
            }
        }
        Ok(attrs)
    }
}

struct Graph {
    node_order: Vec<String>,
    node_attrs: HashMap<String, Attrs>,
    edges: Vec<(String, String, Attrs, usize)>,
}

impl Graph {
    fn touch(&mut self, name: &str, defaults: &Attrs) {
        if !self.node_attrs.contains_key(name) {
            self.node_order.push(name.to_string());
            self.node_attrs.insert(name.to_string(), defaults.clone());
        }
    }
}

fn parse_graph(text: &str) -> Result<Graph, DotError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut head = p.id()?;
    if head.eq_ignore_ascii_case("strict") {
        head = p.id()?;
    }
    if !head.eq_ignore_ascii_case("digraph") {
        return Err(parse_error(1, format!("expected `digraph`, found `{head}`")));
    }
    if matches!(p.peek(), Some(Tok::Id(_))) {
        p.next();
    }
    p.expect(Tok::LBrace)?;

    let mut graph = Graph {
        node_order: Vec::new(),
        node_attrs: HashMap::new(),
        edges: Vec::new(),
    };
    let mut node_defaults = Attrs::new();
    loop {
        let line = p.line();
        match p.peek() {
            None => return Err(parse_error(line, "missing closing `}`")),
            Some(Tok::RBrace) => {
                p.next();
                break;
            }
            Some(Tok::Semi) => {
                p.next();
                continue;
            }
            Some(Tok::Id(_)) => {}
            Some(t) => return Err(parse_error(line, format!("unexpected {t:?}"))),
        }
        let first = p.id()?;
        match first.as_str() {
            "graph" | "edge" => {
                p.attr_lists()?;
                continue;
            }
            "node" if p.peek() == Some(&Tok::LBracket) => {
                node_defaults.extend(p.attr_lists()?);
                continue;
            }
            _ => {}
        }
        if p.peek() == Some(&Tok::Eq) {
            // graph-level attribute such as rankdir=LR
            p.next();
            p.id()?;
            continue;
        }
        let mut chain = vec![first];
        while p.peek() == Some(&Tok::Arrow) {
            p.next();
            chain.push(p.id()?);
        }
        let attrs = p.attr_lists()?;
        for name in &chain {
            graph.touch(name, &node_defaults);
        }
        if chain.len() == 1 {
            graph
                .node_attrs
                .get_mut(&chain[0])
                .expect("touched")
                .extend(attrs);
        } else {
            for pair in chain.windows(2) {
                graph
                    .edges
                    .push((pair[0].clone(), pair[1].clone(), attrs.clone(), line));
            }
        }
    }
    if p.peek().is_some() {
        return Err(parse_error(p.line(), "trailing content after graph"));
    }
    Ok(graph)
}

fn is_grey(color: &str) -> bool {
    let c = color.to_ascii_lowercase();
    c.contains("grey") || c.contains("gray")
}

fn is_sink(attrs: &Attrs) -> bool {
    let filled = attrs.get("style").is_some_and(|s| s.contains("filled"));
    match attrs.get("fillcolor") {
        Some(fill) => is_grey(fill),
        None => filled && attrs.get("color").is_some_and(|c| is_grey(c)),
    }
}

pub(super) fn from_dot(text: &str) -> Result<ProcessModel, DotError> {
    let graph = parse_graph(text)?;
    let is_point = |name: &str| {
        graph.node_attrs[name]
            .get("shape")
            .is_some_and(|s| s.eq_ignore_ascii_case("point"))
    };

    let mut initial: Option<(String, usize)> = None;
    let mut set_initial = |target: &str, line: usize| -> Result<(), DotError> {
        match &initial {
            Some((prev, _)) if prev != target => Err(parse_error(
                line,
                format!("second initial state `{target}` (already `{prev}`)"),
            )),
            _ => {
                initial = Some((target.to_string(), line));
                Ok(())
            }
        }
    };
    for (from, to, _, line) in &graph.edges {
        if is_point(from) {
            set_initial(to, *line)?;
        }
    }
    let has_point_edge = graph.edges.iter().any(|(f, ..)| is_point(f));
    if !has_point_edge {
        for (_, to, attrs, line) in &graph.edges {
            if attrs.get("color").is_some_and(|c| c.eq_ignore_ascii_case("blue")) {
                set_initial(to, *line)?;
            }
        }
    }
    let (initial, _) = initial.ok_or(DotError::NoInitial)?;

    let states: Vec<&String> = graph.node_order.iter().filter(|n| !is_point(n)).collect();
    let index: HashMap<&str, StateId> = states
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    let mut delta: BTreeMap<(StateId, String), StateId> = BTreeMap::new();
    for (from, to, attrs, line) in &graph.edges {
        if is_point(from) {
            continue;
        }
        if is_point(to) {
            return Err(parse_error(*line, format!("edge into point node `{to}`")));
        }
        let uses_blue = attrs.get("color").is_some_and(|c| c.eq_ignore_ascii_case("blue"));
        let label = match attrs.get("label") {
            Some(l) => l.clone(),
            None if uses_blue && !has_point_edge => continue,
            None => return Err(parse_error(*line, format!("edge {from} -> {to} has no label"))),
        };
        let (s, t) = (index[from.as_str()], index[to.as_str()]);
        if let Some(prev) = delta.insert((s, label.clone()), t) {
            if prev != t {
                return Err(DotError::Nondeterministic {
                    state: from.clone(),
                    label,
                });
            }
        }
    }

    let end: Vec<StateId> = states
        .iter()
        .filter(|n| {
            graph.node_attrs[n.as_str()]
                .get("shape")
                .is_some_and(|s| s.eq_ignore_ascii_case("doublecircle"))
        })
        .map(|n| index[n.as_str()])
        .collect();
    let sink: Vec<StateId> = states
        .iter()
        .filter(|n| is_sink(&graph.node_attrs[n.as_str()]))
        .map(|n| index[n.as_str()])
        .collect();

    Ok(ProcessModel::new(
        states.len(),
        [],
        delta.into_iter().map(|((s, l), t)| (s, l, t)),
        index[initial.as_str()],
        end,
        sink,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::tests::words;
    use crate::automaton::RunOutcome;
    use proptest::prelude::*;

    #[test]
    fn single_state_output() {
        let m = ProcessModel::new(1, [], [], 0, [0], []).unwrap();
        let dot = m.to_dot();
        assert_eq!(
            dot,
            "digraph process_model {
    rankdir=LR;
    __start [shape=point];
    __start -> q0 [color=blue];
    q0 [shape=doublecircle];
}
"
        );
        assert_eq!(ProcessModel::from_dot(&dot).unwrap(), m);
    }

    #[test]
    fn hand_written_three_states() {
        let text = r#"
            // reference naming: initial q2, end q1, sink q0
            digraph G {
              rankdir = LR
              node [shape = circle]
              start [shape=point, label=""]
              start -> q2 [ color = "blue" ]
              q1 [ shape = "doublecircle" ]
              q0 [fillcolor=grey style=filled]
              q2 -> q1 [label="a"]
              q2 -> q0 [label = "b"];
              q0 -> q0 [label="a"]; q0 -> q0 [label="b"]
            }
        "#;
        let m = ProcessModel::from_dot(text).unwrap();
        assert_eq!(m.state_count(), 3);
        assert_eq!(m.run(&words("a")), RunOutcome::End(1));
        assert_eq!(m.run(&words("b a b")), RunOutcome::Sink(2));
        assert_eq!(m.end_states().len(), 1);
        assert_eq!(m.sink_states().len(), 1);
        assert_eq!(m.transition_count(), 4);
    }

    #[test]
    fn blue_edge_without_point_node() {
        let text = "digraph { s -> a [color=blue]; a -> b [label=x]; b [shape=doublecircle]; }";
        let m = ProcessModel::from_dot(text).unwrap();
        // `s` is unreachable from the initial state and gets dropped
        assert_eq!(m.run(&words("x")), RunOutcome::End(1));
    }

    #[test]
    fn errors() {
        let nondet = "digraph { p [shape=point]; p -> q; q -> p2 [label=a]; q -> r [label=a]; }";
        assert_eq!(
            ProcessModel::from_dot(nondet),
            Err(DotError::Nondeterministic {
                state: "q".into(),
                label: "a".into()
            })
        );
        assert_eq!(
            ProcessModel::from_dot("digraph { a -> b [label=x]; }"),
            Err(DotError::NoInitial)
        );
        let bad = "digraph {\n p [shape=point];\n p -> q;\n q -> r [label=x;\n}";
        assert!(matches!(ProcessModel::from_dot(bad), Err(DotError::ParseError { .. })));
        let unlabeled = "digraph {\n p [shape=point];\n p -> q;\n q -> r;\n}";
        assert!(matches!(
            ProcessModel::from_dot(unlabeled),
            Err(DotError::ParseError { line: 4, .. })
        ));
    }

    #[test]
    fn quoted_labels_escape() {
        let m = ProcessModel::new(2, [], [(0, "say \"hi\"".into(), 1)], 0, [1], []).unwrap();
        let dot = m.to_dot();
        assert!(dot.contains(r#"[label="say \"hi\""]"#));
        assert_eq!(ProcessModel::from_dot(&dot).unwrap(), m);
    }

    pub(crate) fn arb_model(max_states: usize) -> impl Strategy<Value = ProcessModel> {
        (1..=max_states)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec((0..n, 0..4usize, 0..n), 0..(3 * n)),
                    proptest::collection::vec(0..3u8, n),
                )
            })
            .prop_map(|(n, raw_edges, roles)| {
                let labels = ["a", "b", "c", "d"];
                let mut seen = std::collections::BTreeSet::new();
                let edges: Vec<_> = raw_edges
                    .into_iter()
                    .filter(|(s, l, _)| seen.insert((*s, *l)))
                    .map(|(s, l, t)| (s, labels[l].to_string(), t))
                    .collect();
                let end = (0..n).filter(|i| roles[*i] == 1);
                let sink = (0..n).filter(|i| roles[*i] == 2);
                let m = ProcessModel::new(n, [], edges, 0, end, sink).unwrap();
                // keep only labels that survive normalization
                ProcessModel::new(
                    m.state_count(),
                    [],
                    m.edges().map(|(s, l, t)| (s, l.to_string(), t)).collect::<Vec<_>>(),
                    0,
                    m.end_states().iter().copied().collect::<Vec<_>>(),
                    m.sink_states().iter().copied().collect::<Vec<_>>(),
                )
                .unwrap()
            })
    }

    proptest! {
        #[test]
        fn round_trip(m in arb_model(8)) {
            let dot = m.to_dot();
            let back = ProcessModel::from_dot(&dot).unwrap();
            prop_assert_eq!(back.to_dot(), dot);
            prop_assert_eq!(back, m);
        }
    }
}
