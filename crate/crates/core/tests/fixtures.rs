//! The committed fixtures and what they encode.

mod common;

use common::*;
use tailcheck::automaton::TraceTarget;
use tailcheck::discovery::{discover, LabeledSample};
use tailcheck::eventlog::{
    extract_traces, parse_csv, summarize, variants, Abbreviations, AttributeMapping,
};
use tailcheck::vmodel::{compile, emit_promela};

fn bills(trace: &[String]) -> usize {
    trace.iter().filter(|e| *e == B).count()
}

#[test]
fn m_star_shape() {
    let m = m_star();
    assert_eq!(m.state_count(), 7);
    assert_eq!(m.end_states().len(), 1);
    assert_eq!(m.sink_states().len(), 1);
    assert_eq!(m.alphabet().len(), 5);
}

#[test]
fn m_star_accepts_reference_positives() {
    let m = m_star();
    for t in [
        vec![N, CI, CO],
        vec![N, CI, B, CO],
        vec![N, CI, E, B, CO],
        vec![N, CI, E, E, B, CO],
    ] {
        assert!(m.run(&t).is_end(), "{t:?}");
    }
}

#[test]
fn m_star_has_no_three_bill_end() {
    let m = m_star();
    let ends = m.enumerate_traces(12, TraceTarget::End);
    assert!(!ends.is_empty());
    assert!(ends.iter().all(|t| bills(t) <= 1));
    assert!(ends.iter().any(|t| t.iter().filter(|e| *e == E).count() == 2));
}

#[test]
fn m_star_interior_states_can_sink() {
    let m = m_star();
    let sink = *m.sink_states().iter().next().unwrap();
    for s in m.states() {
        if m.is_end(s) || m.is_sink(s) {
            continue;
        }
        assert!(m.successors(s).any(|(_, t)| t == sink), "q{s}");
    }
}

#[test]
fn reservation_sample_ingestion() {
    let bytes = std::fs::read(fixture("reservations_sample.csv")).unwrap();
    let log = parse_csv(&bytes, &AttributeMapping::default()).unwrap();
    assert_eq!(log.records.len(), 10);
    let s = summarize(&log);
    assert_eq!(
        s.distinct_resources.keys().collect::<Vec<_>>(),
        vec!["fab", "lov", "top"]
    );
    assert_eq!(s.distinct_activities.len(), 1);
    assert_eq!(parse_csv(&bytes, &AttributeMapping::default()).unwrap(), log);
}

#[test]
fn hotel_traces_from_log() {
    let bytes = std::fs::read(fixture("hotel_log.csv")).unwrap();
    let log = parse_csv(&bytes, &AttributeMapping::default()).unwrap();
    let traces = extract_traces(&log, Some(&Abbreviations::hotel_short()));
    let text: Vec<String> = traces.iter().map(|t| t.to_string()).collect();
    let expected: Vec<String> = read_fixture("hotel_traces.txt").lines().map(String::from).collect();
    assert_eq!(text, expected);
    assert_eq!(traces[0].case_id, "112141");
    assert_eq!(variants(&traces).len(), 3);
}

#[test]
fn hotel_discovery_is_exact_for_large_k() {
    let bytes = std::fs::read(fixture("hotel_log.csv")).unwrap();
    let log = parse_csv(&bytes, &AttributeMapping::default()).unwrap();
    let traces = extract_traces(&log, Some(&Abbreviations::hotel_labels()));
    let sample = LabeledSample::from_traces(&traces, &[]);
    let distinct: std::collections::BTreeSet<Vec<String>> =
        traces.iter().map(|t| t.events.clone()).collect();
    for k in [7, 8, 10] {
        let m = discover(&sample, k).unwrap();
        assert_eq!(m.enumerate_traces(7, TraceTarget::End), distinct, "k={k}");
    }
}

#[test]
fn coarse_model_replays_sample_runs() {
    let m = tailcheck::ProcessModel::from_dot(&read_fixture("hotel_coarse.dot")).unwrap();
    assert_eq!(m.state_count(), 3);
    let runs = [
        "CheckOut Extraserviceadded Billpayment Newreservation Billpayment CheckIn CheckIn Newreservation CheckIn Newreservation Extraserviceadded CheckOut",
        "CheckOut Billpayment Billpayment CheckOut",
        "Extraserviceadded Newreservation Extraserviceadded Billpayment Extraserviceadded CheckOut",
        "CheckIn Newreservation CheckOut CheckOut CheckIn Newreservation CheckIn CheckIn CheckOut",
        "Newreservation CheckIn Billpayment CheckOut",
    ];
    let mut lengths = Vec::new();
    for r in runs {
        let t: Vec<&str> = r.split(' ').collect();
        assert!(m.run(&t).is_end(), "{r}");
        lengths.push(t.len());
    }
    assert_eq!(lengths.iter().min(), Some(&4));
    assert_eq!(lengths.iter().max(), Some(&12));
}

#[test]
fn m_star_promela_is_stable() {
    let vm = compile(&m_star(), true);
    let a = emit_promela(&vm, None).unwrap();
    assert_eq!(a, emit_promela(&vm, None).unwrap());
    assert_eq!(a.matches("goto S").count(), m_star().transition_count());
    for name in ["bill_payment", "checkIn", "checkOut", "extra_service", "new_reservation"] {
        assert!(a.contains(&format!("int {name} = 0;")));
    }
}

/// Feeds the generated program to Spin when it is installed.
#[test]
fn spin_accepts_generated_promela() {
    let Ok(out) = std::process::Command::new("which").arg("spin").output() else {
        return;
    };
    if !out.status.success() {
        eprintln!("spin not installed; skipping");
        return;
    }
    let dir = std::env::temp_dir().join(format!("tailcheck-spin-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let pml = dir.join("m_star.pml");
    std::fs::write(&pml, emit_promela(&compile(&m_star(), true), None).unwrap()).unwrap();
    let status = std::process::Command::new("spin")
        .arg("-a")
        .arg(&pml)
        .current_dir(&dir)
        .status()
        .unwrap();
    let _ = std::fs::remove_dir_all(&dir);
    assert!(status.success());
}
