//! Linear temporal logic over model variables.
//!
//! Formulas are built from comparisons `var OP int` between a model
//! variable (`end_state`, `sink_state` or a counter) and an integer
//! constant. [`to_buchi`] translates a formula into a Büchi automaton
//! accepting exactly its models; [`verify`] searches the product of that
//! automaton with a [`VerificationModel`](crate::vmodel::VerificationModel).
//!
//! Verification uses never-claim semantics: the formula is *not* negated,
//! so a counterexample is an execution that satisfies it.

mod buchi;
mod eval;
mod parse;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

pub use buchi::{accepts_lasso, to_buchi, BuchiAutomaton, BuchiEdge, Guard};
pub use eval::{eval_ltl, Valuation};
pub use parse::{parse_ltl, SyntaxError};
pub use verify::{
    read_trail, replay, verify, write_trail, Counterexample, Property, ReplayError, TrailError,
    TrailStep, Verdict, VerifyError, VerifyOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn negated(self) -> Cmp {
        match self {
            Cmp::Eq => Cmp::Ne,
            Cmp::Ne => Cmp::Eq,
            Cmp::Lt => Cmp::Ge,
            Cmp::Ge => Cmp::Lt,
            Cmp::Le => Cmp::Gt,
            Cmp::Gt => Cmp::Le,
        }
    }

    /// The comparator with its operands swapped: `a OP b` iff `b OP' a`.
    pub fn swapped(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Gt => Cmp::Lt,
            Cmp::Le => Cmp::Ge,
            Cmp::Ge => Cmp::Le,
            c => c,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Predicate {
    pub variable: String,
    pub cmp: Cmp,
    pub constant: i64,
}

impl Predicate {
    pub fn new(variable: impl Into<String>, cmp: Cmp, constant: i64) -> Self {
        Self {
            variable: variable.into(),
            cmp,
            constant,
        }
    }

    pub fn negated(&self) -> Predicate {
        Predicate {
            cmp: self.cmp.negated(),
            ..self.clone()
        }
    }

    pub fn holds(&self, value: i64) -> bool {
        self.cmp.holds(value, self.constant)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.variable, self.cmp.symbol(), self.constant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlFormula {
    True,
    False,
    Atom(Predicate),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Implies(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Finally(Box<LtlFormula>),
    Globally(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
}

impl LtlFormula {
    pub fn atom(variable: &str, cmp: Cmp, constant: i64) -> Self {
        LtlFormula::Atom(Predicate::new(variable, cmp, constant))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlFormula) -> Self {
        LtlFormula::Not(Box::new(f))
    }

    pub fn and(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: LtlFormula) -> Self {
        LtlFormula::Next(Box::new(f))
    }

    pub fn finally(f: LtlFormula) -> Self {
        LtlFormula::Finally(Box::new(f))
    }

    pub fn globally(f: LtlFormula) -> Self {
        LtlFormula::Globally(Box::new(f))
    }

    pub fn until(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Until(Box::new(a), Box::new(b))
    }

    fn children(&self) -> Vec<&LtlFormula> {
        use LtlFormula::*;
        match self {
            True | False | Atom(_) => vec![],
            Not(a) | Next(a) | Finally(a) | Globally(a) => vec![a],
            And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) => vec![a, b],
        }
    }

    pub fn atoms(&self) -> Vec<&Predicate> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if let LtlFormula::Atom(p) = f {
                out.push(p);
            }
            stack.extend(f.children().into_iter().rev());
        }
        out
    }

    /// Largest constant compared against each variable.
    pub fn max_constants(&self) -> BTreeMap<&str, i64> {
        let mut out: BTreeMap<&str, i64> = BTreeMap::new();
        for p in self.atoms() {
            let e = out.entry(p.variable.as_str()).or_insert(p.constant);
            *e = (*e).max(p.constant);
        }
        out
    }

    pub fn is_propositional(&self) -> bool {
        use LtlFormula::*;
        match self {
            Next(_) | Finally(_) | Globally(_) | Until(..) => false,
            f => f.children().iter().all(|c| c.is_propositional()),
        }
    }

    /// Evaluates a temporal-free formula on one valuation.
    pub fn holds_now(&self, lookup: &dyn Fn(&str) -> Option<i64>) -> Option<bool> {
        use LtlFormula::*;
        Some(match self {
            True => true,
            False => false,
            Atom(p) => p.holds(lookup(&p.variable)?),
            Not(a) => !a.holds_now(lookup)?,
            And(a, b) => a.holds_now(lookup)? && b.holds_now(lookup)?,
            Or(a, b) => a.holds_now(lookup)? || b.holds_now(lookup)?,
            Implies(a, b) => !a.holds_now(lookup)? || b.holds_now(lookup)?,
            _ => return None,
        })
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

/// Prints in the concrete syntax accepted by [`parse_ltl`]. Operands of
/// operators are parenthesized unless atomic, so printing and re-parsing
/// gives back the same tree.
impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LtlFormula::*;
        struct Operand<'a>(&'a LtlFormula);
        impl fmt::Display for Operand<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self.0 {
                    True | False | Atom(_) => write!(f, "{}", self.0),
                    g => write!(f, "({g})"),
                }
            }
        }
        match self {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Atom(p) => write!(f, "{p}"),
            Not(a) => write!(f, "!{}", Operand(a)),
            Next(a) => write!(f, "X {}", Operand(a)),
            Finally(a) => write!(f, "<> {}", Operand(a)),
            Globally(a) => write!(f, "[] {}", Operand(a)),
            And(a, b) => write!(f, "{} && {}", Operand(a), Operand(b)),
            Or(a, b) => write!(f, "{} || {}", Operand(a), Operand(b)),
            Implies(a, b) => write!(f, "{} -> {}", Operand(a), Operand(b)),
            Until(a, b) => write!(f, "{} U {}", Operand(a), Operand(b)),
        }
    }
}
