#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use tailcheck::ProcessModel;

pub const N: &str = "Newreservation";
pub const CI: &str = "CheckIn";
pub const E: &str = "Extraserviceadded";
pub const B: &str = "Billpayment";
pub const CO: &str = "CheckOut";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn m_star() -> ProcessModel {
    ProcessModel::from_dot(&read_fixture("m_star.dot")).unwrap()
}

pub fn words(s: &[&str]) -> Vec<String> {
    s.iter().map(|w| w.to_string()).collect()
}

/// Random valid models over the labels a, b, c.
pub fn arb_model(max_states: usize) -> impl Strategy<Value = ProcessModel> {
    (1..=max_states)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(prop::option::of(0..n), n * 3),
                prop::collection::vec(0..4u8, n),
            )
        })
        .prop_map(|(n, targets, roles)| {
            let labels = ["a", "b", "c"];
            let edges: Vec<_> = targets
                .iter()
                .enumerate()
                .filter_map(|(i, t)| t.map(|t| (i / 3, labels[i % 3].to_string(), t)))
                .collect();
            let end = (0..n).filter(|i| roles[*i] == 1);
            let sink = (0..n).filter(|i| roles[*i] == 2);
            ProcessModel::new(n, [], edges, 0, end, sink).unwrap()
        })
}
