use std::collections::BTreeMap;

use super::LtlFormula;

/// Variable values in one state of a run.
pub type Valuation = BTreeMap<String, i64>;

/// Evaluates `f` at position 0 of the infinite word `prefix · cycle^ω`.
///
/// Works directly on the semantics: each subformula gets a truth vector
/// over the `prefix.len() + cycle.len()` distinct positions; until is the
/// least and globally the greatest fixpoint of its unfolding. Variables
/// absent from a valuation make their comparisons false.
///
/// # Panics
/// If `cycle` is empty.
pub fn eval_ltl(f: &LtlFormula, prefix: &[Valuation], cycle: &[Valuation]) -> bool {
    assert!(!cycle.is_empty(), "the cycle of a lasso must be non-empty");
    let word: Vec<&Valuation> = prefix.iter().chain(cycle).collect();
    let n = word.len();
    let succ: Vec<usize> = (0..n)
        .map(|i| if i + 1 < n { i + 1 } else { prefix.len() })
        .collect();
    truth(f, &word, &succ)[0]
}

fn fixpoint(init: bool, succ: &[usize], step: impl Fn(usize, bool) -> bool) -> Vec<bool> {
    let mut r = vec![init; succ.len()];
    loop {
        let mut changed = false;
        for i in (0..succ.len()).rev() {
            let v = step(i, r[succ[i]]);
            if v != r[i] {
                r[i] = v;
                changed = true;
            }
        }
        if !changed {
            return r;
        }
    }
}

fn truth(f: &LtlFormula, word: &[&Valuation], succ: &[usize]) -> Vec<bool> {
    use LtlFormula::*;
    let n = word.len();
    match f {
        True => vec![true; n],
        False => vec![false; n],
        Atom(p) => word
            .iter()
            .map(|v| v.get(&p.variable).is_some_and(|&x| p.holds(x)))
            .collect(),
        Not(a) => truth(a, word, succ).into_iter().map(|x| !x).collect(),
        And(a, b) => zip(truth(a, word, succ), truth(b, word, succ), |x, y| x && y),
        Or(a, b) => zip(truth(a, word, succ), truth(b, word, succ), |x, y| x || y),
        Implies(a, b) => zip(truth(a, word, succ), truth(b, word, succ), |x, y| !x || y),
        Next(a) => {
            let t = truth(a, word, succ);
            succ.iter().map(|&j| t[j]).collect()
        }
        Finally(a) => {
            let t = truth(a, word, succ);
            fixpoint(false, succ, |i, later| t[i] || later)
        }
        Globally(a) => {
            let t = truth(a, word, succ);
            fixpoint(true, succ, |i, later| t[i] && later)
        }
        Until(a, b) => {
            let ta = truth(a, word, succ);
            let tb = truth(b, word, succ);
            fixpoint(false, succ, |i, later| tb[i] || (ta[i] && later))
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn val(pairs: &[(&str, i64)]) -> Valuation {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn ev(f: &str, prefix: &[Valuation], cycle: &[Valuation]) -> bool {
        eval_ltl(&parse_ltl(f).unwrap(), prefix, cycle)
    }

    #[test]
    fn finally_reaches_cycle() {
        let e0 = || val(&[("end_state", 0)]);
        let e1 = || val(&[("end_state", 1)]);
        assert!(ev("<> (end_state == 1)", &[e0(), e0()], &[e1()]));
        assert!(ev("<> (end_state == 1)", &[e1()], &[e0()]));
        assert!(!ev("<> (end_state == 1)", &[], &[e0()]));
    }

    #[test]
    fn globally_fails_on_sinking_cycle() {
        let s0 = || val(&[("sink_state", 0)]);
        let s1 = || val(&[("sink_state", 1)]);
        assert!(!ev("[] (sink_state == 0)", &[s0()], &[s0(), s1()]));
        assert!(ev("[] (sink_state == 0)", &[s0()], &[s0()]));
    }

    #[test]
    fn next_wraps_into_cycle() {
        let a = |x| val(&[("a", x)]);
        // word: 0 1 (2 3)^ω
        let prefix = [a(0), a(1)];
        let cycle = [a(2), a(3)];
        assert!(ev("X X X X (a == 2)", &prefix, &cycle));
        assert!(ev("X X X X X (a == 3)", &prefix, &cycle));
        assert!(ev("[] <> (a == 2) && !<> [] (a == 2)", &prefix, &cycle));
    }

    #[test]
    fn until_requires_witness() {
        let v = |p, q| val(&[("p", p), ("q", q)]);
        assert!(ev("p == 1 U q == 1", &[v(1, 0), v(1, 0)], &[v(0, 1)]));
        assert!(!ev("p == 1 U q == 1", &[v(1, 0)], &[v(1, 0)]));
        assert!(!ev("p == 1 U q == 1", &[v(1, 0), v(0, 0)], &[v(0, 1)]));
        assert!(ev("p == 1 U q == 1", &[], &[v(0, 1)]));
    }

    #[test]
    fn missing_variables_are_false() {
        assert!(!ev("x == 0", &[], &[Valuation::new()]));
        assert!(ev("x != 0 -> false", &[], &[Valuation::new()]));
    }
}
