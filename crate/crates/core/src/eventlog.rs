//! Event log ingestion: CSV records, per-case traces, summaries and
//! variant-frequency filtering.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default timestamp layout of the hotel PMS export.
pub const DEFAULT_TIMESTAMP_FORMAT: &str = "dd.MM.yyyy HH:mm:ss";

#[derive(Debug, Error)]
pub enum EventLogError {
    #[error("column `{0}` is missing from the CSV header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp `{value}`")]
    TimestampParse { row: usize, value: String },
    #[error("row {row}: column `{column}` is empty")]
    EmptyField { row: usize, column: String },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Which CSV column plays which role, plus the timestamp layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeMapping {
    pub timestamp_column: String,
    pub case_column: String,
    pub activity_column: String,
    pub resource_column: String,
    pub timestamp_format: String,
}

impl Default for AttributeMapping {
    fn default() -> Self {
        Self {
            timestamp_column: "DATETIME".to_string(),
            case_column: "TASKID".to_string(),
            activity_column: "TASKNAME".to_string(),
            resource_column: "USERNAME".to_string(),
            timestamp_format: DEFAULT_TIMESTAMP_FORMAT.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub timestamp: NaiveDateTime,
    pub case_id: String,
    pub activity: String,
    pub resource: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub records: Vec<EventRecord>,
    pub mapping: AttributeMapping,
}

/// Events of one case, ordered by timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<String>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.events.join(" "))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogSummary {
    pub event_count: usize,
    pub case_count: usize,
    pub distinct_activities: BTreeMap<String, usize>,
    pub distinct_resources: BTreeMap<String, usize>,
    pub trace_length_histogram: BTreeMap<usize, usize>,
}

/// Variant filtering policy. A trace survives when its variant occurs at
/// least `min_variant_frequency` times or is whitelisted.
#[derive(Debug, Clone, Default)]
pub struct FilterPolicy {
    pub min_variant_frequency: usize,
    pub variant_whitelist: Option<HashSet<Vec<String>>>,
}

/// Activity name rewriting applied while extracting traces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abbreviations(pub BTreeMap<String, String>);

const HOTEL_ACTIVITIES: [(&str, &str, &str); 5] = [
    ("New reservation", "Newreservation", "Newres"),
    ("Check In", "CheckIn", "ChIn"),
    ("Extra service added", "Extraserviceadded", "Extra"),
    ("Bill payment", "Billpayment", "Bill"),
    ("Check Out", "CheckOut", "ChOut"),
];

impl Abbreviations {
    /// Hotel activities mapped to the single-word labels used in models.
    pub fn hotel_labels() -> Self {
        Self(
            HOTEL_ACTIVITIES
                .iter()
                .map(|(raw, label, _)| (raw.to_string(), label.to_string()))
                .collect(),
        )
    }

    /// Hotel activities mapped to the short display names.
    pub fn hotel_short() -> Self {
        Self(
            HOTEL_ACTIVITIES
                .iter()
                .map(|(raw, _, short)| (raw.to_string(), short.to_string()))
                .collect(),
        )
    }

    pub fn apply<'a>(&'a self, activity: &'a str) -> &'a str {
        self.0.get(activity).map(String::as_str).unwrap_or(activity)
    }
}

/// Translates a `dd.MM.yyyy HH:mm:ss`-style layout into a chrono format
/// string. Strings that already contain `%` are passed through.
pub fn chrono_format(layout: &str) -> String {
    if layout.contains('%') {
        return layout.to_string();
    }
    const TOKENS: [(&str, &str); 8] = [
        ("yyyy", "%Y"),
        ("yy", "%y"),
        ("MM", "%m"),
        ("dd", "%d"),
        ("HH", "%H"),
        ("hh", "%I"),
        ("mm", "%M"),
        ("ss", "%S"),
    ];
    let mut out = String::with_capacity(layout.len() * 2);
    let mut rest = layout;
    'outer: while !rest.is_empty() {
        for (token, spec) in TOKENS {
            if let Some(tail) = rest.strip_prefix(token) {
                out.push_str(spec);
                rest = tail;
                continue 'outer;
            }
        }
        let c = rest.chars().next().unwrap();
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

/// Parses CSV bytes into an [`EventLog`]. Row numbers in errors are
/// 1-based data rows (the header is row 0).
pub fn parse_csv(text: &[u8], mapping: &AttributeMapping) -> Result<EventLog, EventLogError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EventLogError::MissingColumn(name.to_string()))
    };
    let ts_col = column(&mapping.timestamp_column)?;
    let case_col = column(&mapping.case_column)?;
    let act_col = column(&mapping.activity_column)?;
    let res_col = column(&mapping.resource_column)?;
    let format = chrono_format(&mapping.timestamp_format);

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let row_no = i + 1;
        let field = |idx: usize, name: &str| -> Result<String, EventLogError> {
            match row.get(idx) {
                Some(v) if !v.is_empty() => Ok(v.to_string()),
                _ => Err(EventLogError::EmptyField {
                    row: row_no,
                    column: name.to_string(),
                }),
            }
        };
        let raw_ts = field(ts_col, &mapping.timestamp_column)?;
        let timestamp = NaiveDateTime::parse_from_str(&raw_ts, &format).map_err(|_| {
            EventLogError::TimestampParse {
                row: row_no,
                value: raw_ts.clone(),
            }
        })?;
        records.push(EventRecord {
            timestamp,
            case_id: field(case_col, &mapping.case_column)?,
            activity: field(act_col, &mapping.activity_column)?,
            resource: field(res_col, &mapping.resource_column)?,
        });
    }
    Ok(EventLog {
        records,
        mapping: mapping.clone(),
    })
}

/// Groups records by case. Traces appear in first-appearance order of their
/// case ids; events are sorted by timestamp, ties keep file order.
pub fn extract_traces(log: &EventLog, abbreviations: Option<&Abbreviations>) -> Vec<Trace> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(&str, Vec<&EventRecord>)> = Vec::new();
    for record in &log.records {
        let slot = *index.entry(record.case_id.as_str()).or_insert_with(|| {
            groups.push((record.case_id.as_str(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push(record);
    }
    groups
        .into_iter()
        .map(|(case_id, mut events)| {
            // sort_by_key is stable
            events.sort_by_key(|r| r.timestamp);
            Trace {
                case_id: case_id.to_string(),
                events: events
                    .into_iter()
                    .map(|r| match abbreviations {
                        Some(a) => a.apply(&r.activity).to_string(),
                        None => r.activity.clone(),
                    })
                    .collect(),
            }
        })
        .collect()
}

pub fn summarize(log: &EventLog) -> LogSummary {
    let mut summary = LogSummary {
        event_count: log.records.len(),
        ..LogSummary::default()
    };
    let mut per_case: HashMap<&str, usize> = HashMap::new();
    for record in &log.records {
        *summary
            .distinct_activities
            .entry(record.activity.clone())
            .or_default() += 1;
        *summary
            .distinct_resources
            .entry(record.resource.clone())
            .or_default() += 1;
        *per_case.entry(record.case_id.as_str()).or_default() += 1;
    }
    summary.case_count = per_case.len();
    for len in per_case.into_values() {
        *summary.trace_length_histogram.entry(len).or_default() += 1;
    }
    summary
}

pub fn filter_traces(traces: &[Trace], policy: &FilterPolicy) -> Vec<Trace> {
    let mut frequency: HashMap<&[String], usize> = HashMap::new();
    for t in traces {
        *frequency.entry(t.events.as_slice()).or_default() += 1;
    }
    traces
        .iter()
        .filter(|t| {
            frequency[t.events.as_slice()] >= policy.min_variant_frequency
                || policy
                    .variant_whitelist
                    .as_ref()
                    .is_some_and(|w| w.contains(&t.events))
        })
        .cloned()
        .collect()
}

/// Variant frequencies in first-appearance order.
pub fn variants(traces: &[Trace]) -> Vec<(Vec<String>, usize)> {
    let mut index: HashMap<&[String], usize> = HashMap::new();
    let mut out: Vec<(Vec<String>, usize)> = Vec::new();
    for t in traces {
        match index.get(t.events.as_slice()) {
            Some(&i) => out[i].1 += 1,
            None => {
                index.insert(t.events.as_slice(), out.len());
                out.push((t.events.clone(), 1));
            }
        }
    }
    out
}

/// One line per trace, events separated by single spaces.
pub fn write_traces(traces: &[Trace]) -> String {
    let mut out = String::new();
    for t in traces {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
