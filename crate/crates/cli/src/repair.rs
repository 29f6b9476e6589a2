//! Feeding classified runs back into discovery.

use std::collections::BTreeSet;

use tailcheck::automaton::TraceTarget;
use tailcheck::discovery::{discover, DiscoveryError, LabeledSample};
use tailcheck::sim::Classification;
use tailcheck::ProcessModel;

/// End-accepted traces gained and lost by a model change, up to a length
/// bound.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LanguageDiff {
    pub added: BTreeSet<Vec<String>>,
    pub removed: BTreeSet<Vec<String>>,
}

impl LanguageDiff {
    pub fn between(old: &ProcessModel, new: &ProcessModel, max_len: usize) -> Self {
        let a = old.enumerate_traces(max_len, TraceTarget::End);
        let b = new.enumerate_traces(max_len, TraceTarget::End);
        Self {
            added: b.difference(&a).cloned().collect(),
            removed: a.difference(&b).cloned().collect(),
        }
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        for (sign, set) in [('+', &self.added), ('-', &self.removed)] {
            for t in set {
                out.push(sign);
                out.push(' ');
                out.push_str(&t.join(" "));
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Repair {
    pub model: ProcessModel,
    pub sample: LabeledSample,
    pub diff: LanguageDiff,
}

/// Adds each classified run to the sample under its label, removing it from
/// the opposite list so a relabeled trace does not conflict, then
/// rediscovers and diffs the languages up to `diff_len`. A run classified
/// both ways is a [`DiscoveryError::ConflictingLabel`].
pub fn repair_loop(
    model: &ProcessModel,
    sample: &LabeledSample,
    classified: &[(Vec<String>, Classification)],
    k: usize,
    diff_len: usize,
) -> Result<Repair, DiscoveryError> {
    for (i, (trace, class)) in classified.iter().enumerate() {
        if classified[..i]
            .iter()
            .any(|(t, c)| t == trace && c != class)
        {
            return Err(DiscoveryError::ConflictingLabel(trace.clone()));
        }
    }
    let mut sample = sample.clone();
    for (trace, class) in classified {
        let (into, from) = match class {
            Classification::Positive => (&mut sample.positives, &mut sample.negatives),
            Classification::Negative => (&mut sample.negatives, &mut sample.positives),
        };
        from.retain(|t| t != trace);
        if !into.contains(trace) {
            into.push(trace.clone());
        }
    }
    let new = discover(&sample, k)?;
    Ok(Repair {
        diff: LanguageDiff::between(model, &new, diff_len),
        model: new,
        sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn base() -> LabeledSample {
        LabeledSample {
            positives: vec![t("N CI CO"), t("N CI B CO"), t("N CI E B CO")],
            negatives: vec![t("CO")],
        }
    }

    #[test]
    fn nothing_injected_changes_nothing() {
        let m = discover(&base(), 2).unwrap();
        let r = repair_loop(&m, &base(), &[], 2, 8).unwrap();
        assert_eq!(r.model, m);
        assert_eq!(r.diff, LanguageDiff::default());
    }

    #[test]
    fn injected_positive_is_accepted() {
        let m = discover(&base(), 2).unwrap();
        let extra = t("N CI B B B CO");
        assert!(!m.run(&extra).is_end());
        let r = repair_loop(
            &m,
            &base(),
            &[(extra.clone(), Classification::Positive)],
            2,
            8,
        )
        .unwrap();
        assert!(r.model.run(&extra).is_end());
        for p in &base().positives {
            assert!(r.model.run(p).is_end());
        }
        assert!(r.diff.added.contains(&extra));
        assert!(r.diff.report().contains("+ N CI B B B CO"));
    }

    #[test]
    fn contradictory_runs_conflict() {
        let m = discover(&base(), 2).unwrap();
        let x = t("N CO");
        let runs = [
            (x.clone(), Classification::Positive),
            (x.clone(), Classification::Negative),
        ];
        assert_eq!(
            repair_loop(&m, &base(), &runs, 2, 8).unwrap_err(),
            DiscoveryError::ConflictingLabel(x)
        );
    }

    #[test]
    fn relabeled_positive_becomes_rejected() {
        let m = discover(&base(), 2).unwrap();
        let fp = t("N CI E B CO");
        let r = repair_loop(&m, &base(), &[(fp.clone(), Classification::Negative)], 2, 8).unwrap();
        assert!(!r.model.run(&fp).is_end());
        assert!(!r.sample.positives.contains(&fp));
        assert!(r.diff.removed.contains(&fp));
    }
}
