use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Records left out of the study: no MLII lead (102, 104) or paced beats
/// (107, 217).
pub const EXCLUDED_RECORDS: [&str; 4] = ["102", "104", "107", "217"];

const HEALTHY: [&str; 11] = [
    "101", "103", "112", "113", "115", "117", "121", "122", "123", "230", "234",
];

const UNHEALTHY: [&str; 33] = [
    "100", "105", "106", "108", "109", "111", "114", "116", "118", "119", "124", "200", "201",
    "202", "203", "205", "207", "208", "209", "210", "212", "213", "214", "215", "219", "220",
    "221", "222", "223", "228", "231", "232", "233",
];

/// Heart status of a record. Unhealthy is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Healthy,
    Unhealthy,
}

impl Label {
    /// Target value for the sigmoid output: Healthy = 0, Unhealthy = 1.
    pub fn target(self) -> f64 {
        match self {
            Label::Healthy => 0.0,
            Label::Unhealthy => 1.0,
        }
    }

    pub fn from_probability(p: f64) -> Self {
        if p >= 0.5 {
            Label::Unhealthy
        } else {
            Label::Healthy
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Healthy => "Healthy",
            Label::Unhealthy => "Unhealthy",
        })
    }
}

/// Record id to label mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelTable {
    entries: BTreeMap<String, Label>,
}

impl LabelTable {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, Label)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, record_id: &str) -> Option<Label> {
        self.entries.get(record_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Label)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn records_with(&self, label: Label) -> impl Iterator<Item = &str> {
        self.iter().filter(move |(_, l)| *l == label).map(|(k, _)| k)
    }
}

/// The 44-record labeling of the MIT-BIH arrhythmia database used for the
/// healthy/unhealthy experiment.
pub fn load_labels() -> LabelTable {
    LabelTable::from_entries(
        HEALTHY
            .iter()
            .map(|id| (id.to_string(), Label::Healthy))
            .chain(UNHEALTHY.iter().map(|id| (id.to_string(), Label::Unhealthy))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shape() {
        let table = load_labels();
        assert_eq!(table.len(), 44);
        assert_eq!(table.records_with(Label::Healthy).count(), 11);
        assert_eq!(table.records_with(Label::Unhealthy).count(), 33);
        for id in EXCLUDED_RECORDS {
            assert_eq!(table.get(id), None);
        }
    }

    #[test]
    fn lookups() {
        let table = load_labels();
        assert_eq!(table.get("101"), Some(Label::Healthy));
        assert_eq!(table.get("210"), Some(Label::Unhealthy));
        assert_eq!(table.get("100"), Some(Label::Unhealthy));
        assert_eq!(table.get("107"), None);
    }

    #[test]
    fn threshold_ties_go_unhealthy() {
        assert_eq!(Label::from_probability(0.5), Label::Unhealthy);
        assert_eq!(Label::from_probability(0.4999), Label::Healthy);
    }
}
