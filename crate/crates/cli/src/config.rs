//! Workbench configuration file.
//!
//! ```toml
//! timestamp_column = "DATETIME"
//! case_column = "TASKID"
//! activity_column = "TASKNAME"
//! resource_column = "USERNAME"
//! timestamp_format = "dd.MM.yyyy HH:mm:ss"
//! k = 2
//! seed = 0
//! max_steps = 10000
//! max_depth = 10000
//! counter_cap = 8
//!
//! [abbreviations]
//! "New reservation" = "Newreservation"
//!
//! [counter_names]
//! Billpayment = "bill_payment"
//! ```
//!
//! Every key is optional. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tailcheck::eventlog::{Abbreviations, AttributeMapping};
use tailcheck::vmodel::CounterNaming;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkbenchConfig {
    pub timestamp_column: Option<String>,
    pub case_column: Option<String>,
    pub activity_column: Option<String>,
    pub resource_column: Option<String>,
    pub timestamp_format: Option<String>,
    /// Raw activity name -> label used in traces and models.
    pub abbreviations: Option<BTreeMap<String, String>>,
    /// Event label -> counter variable name; merged over the built-in table.
    pub counter_names: BTreeMap<String, String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub max_depth: Option<usize>,
    pub counter_cap: Option<u64>,
}

impl WorkbenchConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn mapping(&self) -> AttributeMapping {
        let d = AttributeMapping::default();
        let pick = |v: &Option<String>, default: String| v.clone().unwrap_or(default);
        AttributeMapping {
            timestamp_column: pick(&self.timestamp_column, d.timestamp_column),
            case_column: pick(&self.case_column, d.case_column),
            activity_column: pick(&self.activity_column, d.activity_column),
            resource_column: pick(&self.resource_column, d.resource_column),
            timestamp_format: pick(&self.timestamp_format, d.timestamp_format),
        }
    }

    /// Configured abbreviations, or the built-in hotel labels.
    pub fn abbreviations(&self) -> Abbreviations {
        match &self.abbreviations {
            Some(map) => Abbreviations(map.clone()),
            None => Abbreviations::hotel_labels(),
        }
    }

    pub fn counter_naming(&self) -> CounterNaming {
        let mut naming = CounterNaming::default();
        naming.0.extend(self.counter_names.clone());
        naming
    }
}
