mod common;

use common::*;
use proptest::prelude::*;
use tailcheck::ltl::{
    eval_ltl, parse_ltl, replay, verify, LtlFormula, Property, Verdict, VerifyOptions,
};
use tailcheck::sim::simulate_random;
use tailcheck::vmodel::{compile, VerificationModel};

fn m_star_vm() -> VerificationModel {
    compile(&m_star(), true)
}

fn run_ltl(vm: &VerificationModel, text: &str) -> Verdict {
    let f = parse_ltl(text).unwrap();
    let v = verify(vm, &Property::Ltl(f.clone()), &VerifyOptions::default()).unwrap();
    if let Some(cx) = v.counterexample() {
        let (prefix, cycle) = cx.lasso();
        assert!(eval_ltl(&f, &prefix, &cycle), "{text}: witness does not satisfy formula");
        assert_eq!(replay(vm, &cx.trail).unwrap(), cx.run);
    }
    v
}

#[test]
fn assert_end_state_zero_is_violated() {
    let vm = m_star_vm();
    let f = parse_ltl("end_state == 0").unwrap();
    let v = verify(&vm, &Property::Assert(f), &VerifyOptions::default()).unwrap();
    let Verdict::AssertViolated(cx) = v else {
        panic!("expected an assertion violation, got {v:?}");
    };
    assert_eq!(cx.run.events, words(&[N, CI, CO]));
    assert_eq!(cx.run.final_vars.end_state, 1);
    assert!(m_star().run(&cx.run.events).is_end());
}

#[test]
fn finally_end_has_witness() {
    let v = run_ltl(&m_star_vm(), "<> (end_state == 1)");
    let cx = v.counterexample().expect("end is reachable");
    assert!(matches!(v, Verdict::CounterexampleFound(_)));
    assert!(m_star().run(cx.run.until_first_end().unwrap()).is_end());
}

#[test]
fn two_extras_witness() {
    let v = run_ltl(&m_star_vm(), "<> (end_state == 1 && extra_service == 2)");
    let cx = v.counterexample().unwrap();
    assert_eq!(cx.run.final_vars.counters["extra_service"], 2);
    assert_eq!(cx.run.final_vars.end_state, 1);
}

#[test]
fn two_extras_trail_replays() {
    use tailcheck::ltl::TrailStep;
    let trail: Vec<TrailStep> = [N, CI, E, E, B, CO]
        .iter()
        .map(|l| TrailStep::Take(l.to_string()))
        .collect();
    let run = replay(&m_star_vm(), &trail).unwrap();
    assert_eq!(run.final_vars.counters["extra_service"], 2);
    assert_eq!(run.final_vars.end_state, 1);
}

#[test]
fn check_in_implication_witness() {
    // satisfied; the witness only has to satisfy the formula
    let v = run_ltl(
        &m_star_vm(),
        "(checkIn == 1 && end_state == 0) -> <> (checkOut == 1 && end_state == 1)",
    );
    assert!(matches!(v, Verdict::CounterexampleFound(_)));
}

#[test]
fn until_single_bill_witness() {
    let v = run_ltl(
        &m_star_vm(),
        "(end_state == 0) U (end_state == 1 && bill_payment == 1)",
    );
    let cx = v.counterexample().unwrap();
    assert_eq!(cx.run.final_vars.counters["bill_payment"], 1);
}

#[test]
fn three_bills_impossible() {
    let v = run_ltl(
        &m_star_vm(),
        "<> (end_state == 1 && sink_state == 0 && bill_payment == 3)",
    );
    let Verdict::NoCounterexample {
        states_explored,
        max_depth_hit,
    } = v
    else {
        panic!("unexpected counterexample {v:?}");
    };
    assert!(!max_depth_hit);
    assert!(states_explored > 0);
}

#[test]
fn assert_and_finally_agree_on_m_star() {
    let vm = m_star_vm();
    let a = verify(
        &vm,
        &Property::Assert(parse_ltl("end_state == 0").unwrap()),
        &VerifyOptions::default(),
    )
    .unwrap();
    let f = run_ltl(&vm, "<> (end_state == 1)");
    assert_eq!(
        matches!(a, Verdict::AssertViolated(_)),
        matches!(f, Verdict::CounterexampleFound(_))
    );
}

#[test]
fn m_star_has_no_deadlock() {
    let v = verify(&m_star_vm(), &Property::DeadlockOnly, &VerifyOptions::default()).unwrap();
    assert!(matches!(v, Verdict::NoCounterexample { max_depth_hit: false, .. }));
}

fn arb_state_formula() -> impl Strategy<Value = LtlFormula> {
    let atom = (
        prop::sample::select(vec!["end_state", "sink_state", "a", "b"]),
        prop::sample::select(vec!["==", "!=", "<", ">="]),
        0i64..3,
    )
        .prop_map(|(v, c, k)| parse_ltl(&format!("{v} {c} {k}")).unwrap());
    atom.prop_recursive(3, 10, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(LtlFormula::not),
            inner.clone().prop_map(LtlFormula::finally),
            inner.clone().prop_map(LtlFormula::globally),
            inner.clone().prop_map(LtlFormula::next),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| LtlFormula::and(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| LtlFormula::or(x, y)),
            (inner.clone(), inner).prop_map(|(x, y)| LtlFormula::until(x, y)),
        ]
    })
}

/// Valuation sequence of a finished random run, stutter-extended.
fn run_lasso(
    vm: &VerificationModel,
    events: &[String],
) -> (Vec<tailcheck::ltl::Valuation>, Vec<tailcheck::ltl::Valuation>) {
    use tailcheck::ltl::TrailStep;
    let mut vals = Vec::new();
    for i in 0..=events.len() {
        let trail: Vec<TrailStep> = events[..i].iter().map(|e| TrailStep::Take(e.clone())).collect();
        let r = replay(vm, &trail).unwrap();
        let mut v = tailcheck::ltl::Valuation::new();
        v.insert("end_state".into(), r.final_vars.end_state as i64);
        v.insert("sink_state".into(), r.final_vars.sink_state as i64);
        for (name, value) in r.final_vars.counters {
            v.insert(name, value as i64);
        }
        vals.push(v);
    }
    let last = vals.pop().unwrap();
    (vals, vec![last])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn witnesses_satisfy_their_formula(m in arb_model(5), f in arb_state_formula()) {
        let vm = compile(&m, true);
        let Ok(v) = verify(&vm, &Property::Ltl(f.clone()), &VerifyOptions::default()) else {
            // formula mentions a label the model lacks
            return Ok(());
        };
        if let Some(cx) = v.counterexample() {
            let (p, c) = cx.lasso();
            prop_assert!(eval_ltl(&f, &p, &c));
            prop_assert_eq!(&replay(&vm, &cx.trail).unwrap(), &cx.run);
        }
    }

    #[test]
    fn random_runs_never_refute_exhaustive_absence(m in arb_model(8), f in arb_state_formula()) {
        let vm = compile(&m, true);
        let Ok(Verdict::NoCounterexample { max_depth_hit: false, .. }) =
            verify(&vm, &Property::Ltl(f.clone()), &VerifyOptions::default())
        else {
            return Ok(());
        };
        for seed in 0..1000 {
            let run = simulate_random(&vm, seed, 200);
            if run.outcome != tailcheck::sim::RunOutcome::StepLimit {
                let (p, c) = run_lasso(&vm, &run.events);
                prop_assert!(!eval_ltl(&f, &p, &c), "seed {} satisfies {}", seed, f);
            }
        }
    }

    #[test]
    fn deeper_search_keeps_the_verdict(m in arb_model(6), f in arb_state_formula()) {
        let vm = compile(&m, true);
        let Ok(base) = verify(&vm, &Property::Ltl(f.clone()), &VerifyOptions::default()) else {
            return Ok(());
        };
        if matches!(base, Verdict::NoCounterexample { max_depth_hit: true, .. }) {
            return Ok(());
        }
        let deeper = verify(
            &vm,
            &Property::Ltl(f),
            &VerifyOptions { max_depth: 100_000, ..VerifyOptions::default() },
        )
        .unwrap();
        prop_assert_eq!(base.counterexample().is_some(), deeper.counterexample().is_some());
    }

    #[test]
    fn assert_duality(m in arb_model(8)) {
        let vm = compile(&m, false);
        let a = verify(&vm, &Property::Assert(parse_ltl("end_state == 0").unwrap()), &VerifyOptions::default()).unwrap();
        let f = verify(&vm, &Property::Ltl(parse_ltl("<> (end_state == 1)").unwrap()), &VerifyOptions::default()).unwrap();
        prop_assert_eq!(
            matches!(a, Verdict::AssertViolated(_)),
            matches!(f, Verdict::CounterexampleFound(_))
        );
    }
}
