use std::fmt::Write;

use thiserror::Error;

use super::{Choice, Marker, VerificationModel, END_STATE, SINK_STATE};
use crate::ltl::{to_buchi, BuchiAutomaton, LtlFormula, Predicate};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromelaError {
    #[error("claim refers to unknown variable `{0}`")]
    UnsupportedAtom(String),
}

fn default_claim() -> LtlFormula {
    LtlFormula::finally(LtlFormula::atom(END_STATE, crate::ltl::Cmp::Eq, 1))
}

fn state_name(b: &BuchiAutomaton, q: usize) -> String {
    match (q == b.initial, b.is_accepting(q)) {
        (true, false) => "T0_init".into(),
        (true, true) => "accept_init".into(),
        (false, true) => format!("accept_S{q}"),
        (false, false) => format!("T0_S{q}"),
    }
}

fn condition(preds: &[&Predicate]) -> String {
    if preds.is_empty() {
        return "(1)".into();
    }
    let parts: Vec<String> = preds.iter().map(|p| format!("({p})")).collect();
    format!("({})", parts.join(" && "))
}

/// The claim as a Promela `never` block. The formula is translated as
/// given, without negation, so the verifier reports runs satisfying it.
fn never_claim(f: &LtlFormula) -> String {
    let b = to_buchi(f);
    let mut out = String::new();
    writeln!(out, "never {{ /* {f} */").unwrap();
    for q in 0..b.state_count {
        writeln!(out, "{}:", state_name(&b, q)).unwrap();
        let edges: Vec<_> = b.out_edges(q).collect();
        if edges.is_empty() {
            out.push_str("\tfalse;\n");
            continue;
        }
        out.push_str("\tdo\n");
        for e in edges {
            let preds: Vec<&Predicate> = e.guard.0.iter().collect();
            writeln!(out, "\t:: {} -> goto {}", condition(&preds), state_name(&b, e.to)).unwrap();
        }
        out.push_str("\tod;\n");
    }
    out.push_str("}\n");
    out
}

/// Renders `vm` as a single-process Promela program followed by a never
/// claim for `claim` (by default, eventually reaching the end state).
pub fn emit_promela(vm: &VerificationModel, claim: Option<&LtlFormula>) -> Result<String, PromelaError> {
    let default = default_claim();
    let claim = claim.unwrap_or(&default);
    for p in claim.atoms() {
        if vm.resolve(&p.variable).is_none() {
            return Err(PromelaError::UnsupportedAtom(p.variable.clone()));
        }
    }

    let mut out = String::new();
    writeln!(out, "int {END_STATE} = 0;").unwrap();
    writeln!(out, "int {SINK_STATE} = 0;").unwrap();
    for c in vm.counters() {
        writeln!(out, "int {} = 0;", c.name).unwrap();
    }
    out.push_str("\nactive proctype model()\n{\n");
    for (i, block) in vm.blocks().iter().enumerate() {
        writeln!(out, "S{i}:").unwrap();
        match block.marker {
            Some(Marker::End) => {
                writeln!(out, "\t{END_STATE} = 1;").unwrap();
                out.push_str("\tprintf(\"END \");\n");
            }
            Some(Marker::Sink) => {
                writeln!(out, "\t{SINK_STATE} = 1;").unwrap();
                out.push_str("\tprintf(\"SINK \");\n");
            }
            None => {}
        }
        if block.options.is_empty() {
            out.push_str("\t(0);\n");
            continue;
        }
        out.push_str("\tif\n");
        for option in &block.options {
            match option {
                Choice::Take {
                    label,
                    target,
                    counter,
                } => {
                    let escaped = label.replace('\\', "\\\\").replace('"', "\\\"").replace('%', "%%");
                    write!(out, "\t:: printf(\"{escaped} \");").unwrap();
                    if let Some(c) = counter {
                        write!(out, " {}++;", vm.counters()[*c].name).unwrap();
                    }
                    writeln!(out, " goto S{target}").unwrap();
                }
                Choice::Stop => out.push_str("\t:: goto stop\n"),
            }
        }
        out.push_str("\tfi;\n");
    }
    out.push_str("stop:\n\tprintf(\"\\n\");\n\tskip\n}\n\n");
    out.push_str(&never_claim(claim));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::ProcessModel;
    use crate::ltl::parse_ltl;
    use crate::vmodel::compile;

    fn single_end() -> VerificationModel {
        compile(&ProcessModel::new(1, [], [], 0, [0], []).unwrap(), false)
    }

    #[test]
    fn default_claim_accepts_on_end() {
        let text = emit_promela(&single_end(), None).unwrap();
        assert!(text.contains("never { /* <> end_state == 1 */"));
        assert!(text.contains(":: ((end_state == 1)) -> goto accept_S1"));
        assert!(text.contains("accept_S1:\n\tdo\n\t:: (1) -> goto accept_S1\n\tod;"));
    }

    #[test]
    fn single_end_program() {
        let text = emit_promela(&single_end(), None).unwrap();
        let body = text.split("never").next().unwrap();
        assert_eq!(
            body,
            "int end_state = 0;\nint sink_state = 0;\n\nactive proctype model()\n{\nS0:\n\
             \tend_state = 1;\n\tprintf(\"END \");\n\tif\n\t:: goto stop\n\tfi;\n\
             stop:\n\tprintf(\"\\n\");\n\tskip\n}\n\n"
        );
    }

    #[test]
    fn counters_and_gotos() {
        let m = ProcessModel::new(
            2,
            [],
            [(0, "CheckIn".into(), 1), (1, "Billpayment".into(), 1)],
            0,
            [1],
            [],
        )
        .unwrap();
        let text = emit_promela(&compile(&m, true), None).unwrap();
        assert!(text.contains("int checkIn = 0;"));
        assert!(text.contains(":: printf(\"CheckIn \"); checkIn++; goto S1"));
        assert!(text.contains(":: printf(\"Billpayment \"); bill_payment++; goto S1"));
    }

    #[test]
    fn unknown_claim_variable() {
        let f = parse_ltl("<> (bill_payment == 3)").unwrap();
        assert_eq!(
            emit_promela(&single_end(), Some(&f)),
            Err(PromelaError::UnsupportedAtom("bill_payment".into()))
        );
    }

    #[test]
    fn byte_stable() {
        let f = parse_ltl("(end_state == 0) U (end_state == 1 && sink_state == 0)").unwrap();
        let vm = single_end();
        assert_eq!(emit_promela(&vm, Some(&f)), emit_promela(&vm, Some(&f)));
    }
}
