use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{END_STATE, SINK_STATE};

/// Maps event labels to counter variable names.
///
/// Labels found in the table use the tabled name. Any other label is
/// converted by rule: labels made of several words become lower snake
/// case (`Check In` -> `check_in`), single words get a lower-case first
/// letter (`CheckIn` -> `checkIn`). Characters that are not valid in an
/// identifier become `_`, and clashes get a numeric suffix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterNaming(pub BTreeMap<String, String>);

impl Default for CounterNaming {
    fn default() -> Self {
        Self(
            [
                ("CheckIn", "checkIn"),
                ("CheckOut", "checkOut"),
                ("Billpayment", "bill_payment"),
                ("Extraserviceadded", "extra_service"),
                ("Newreservation", "new_reservation"),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        )
    }
}

fn by_rule(label: &str) -> String {
    let words: Vec<&str> = label
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    let mut name = match words.as_slice() {
        [] => String::new(),
        [single] => {
            let mut chars = single.chars();
            let first = chars.next().unwrap().to_ascii_lowercase();
            std::iter::once(first).chain(chars).collect()
        }
        many => many
            .iter()
            .map(|w| w.to_ascii_lowercase())
            .collect::<Vec<_>>()
            .join("_"),
    };
    if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
        name.insert(0, '_');
    }
    name
}

impl CounterNaming {
    pub fn name_for(&self, label: &str) -> String {
        self.0.get(label).cloned().unwrap_or_else(|| by_rule(label))
    }

    /// Names for `labels` in order, unique and distinct from the flag
    /// variables.
    pub fn assign<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Vec<(String, String)> {
        let mut taken: BTreeSet<String> = [END_STATE, SINK_STATE].map(String::from).into();
        labels
            .into_iter()
            .map(|label| {
                let base = self.name_for(label);
                let mut name = base.clone();
                let mut n = 2;
                while !taken.insert(name.clone()) {
                    name = format!("{base}_{n}");
                    n += 1;
                }
                (label.to_string(), name)
            })
            .collect()
    }
}
