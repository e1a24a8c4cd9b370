use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::neuralnet::{predict, Model};
use crate::pipeline::split::Example;
use crate::record_io::Label;

/// Fraction of positions where `predictions` matches `labels`.
pub fn accuracy(predictions: &[Label], labels: &[Label]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(PipelineError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordPrediction {
    pub record_id: String,
    pub role: Role,
    pub label: Label,
    pub probability: f64,
    pub predicted: Label,
}

impl RecordPrediction {
    pub fn correct(&self) -> bool {
        self.label == self.predicted
    }
}

/// Counts with Unhealthy as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub true_negative: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

impl Confusion {
    fn from_rows<'a>(rows: impl Iterator<Item = &'a RecordPrediction>) -> Self {
        let mut c = Self::default();
        for r in rows {
            match (r.label, r.predicted) {
                (Label::Unhealthy, Label::Unhealthy) => c.true_positive += 1,
                (Label::Healthy, Label::Healthy) => c.true_negative += 1,
                (Label::Healthy, Label::Unhealthy) => c.false_positive += 1,
                (Label::Unhealthy, Label::Healthy) => c.false_negative += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.true_negative + self.false_positive + self.false_negative
    }
}

/// Overall, train, test and per-class test accuracies. Entries are `None` when the
/// corresponding subset is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub overall: Option<f64>,
    pub train: Option<f64>,
    pub test: Option<f64>,
    pub healthy_test: Option<f64>,
    pub disease_test: Option<f64>,
}

/// Per-record predictions plus everything derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: serde_json::Value,
    pub records: Vec<RecordPrediction>,
    pub train_confusion: Confusion,
    pub test_confusion: Confusion,
    pub summary: Summary,
}

fn subset_accuracy<'a>(rows: impl Iterator<Item = &'a RecordPrediction>) -> Option<f64> {
    let (pred, label): (Vec<Label>, Vec<Label>) = rows.map(|r| (r.predicted, r.label)).unzip();
    accuracy(&pred, &label).ok()
}

impl RunReport {
    pub fn new(records: Vec<RecordPrediction>, seed: u64, config: serde_json::Value) -> Self {
        let role = |role: Role| move |r: &&RecordPrediction| r.role == role;
        let summary = Summary {
            overall: subset_accuracy(records.iter()),
            train: subset_accuracy(records.iter().filter(role(Role::Train))),
            test: subset_accuracy(records.iter().filter(role(Role::Test))),
            healthy_test: subset_accuracy(
                records
                    .iter()
                    .filter(role(Role::Test))
                    .filter(|r| r.label == Label::Healthy),
            ),
            disease_test: subset_accuracy(
                records
                    .iter()
                    .filter(role(Role::Test))
                    .filter(|r| r.label == Label::Unhealthy),
            ),
        };
        Self {
            seed,
            train_confusion: Confusion::from_rows(records.iter().filter(role(Role::Train))),
            test_confusion: Confusion::from_rows(records.iter().filter(role(Role::Test))),
            summary,
            config,
            records,
        }
    }

    /// Summary recomputed from the per-record rows.
    pub fn recomputed_summary(&self) -> Summary {
        Self::new(self.records.clone(), self.seed, serde_json::Value::Null).summary
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Scores every example; predicted label is Unhealthy iff `p >= 0.5`.
pub fn predict_set(model: &Model, set: &[Example], role: Role) -> Result<Vec<RecordPrediction>> {
    set.iter()
        .map(|ex| {
            let probability = predict(model, &ex.image.to_tensor())?;
            Ok(RecordPrediction {
                record_id: ex.record_id.clone(),
                role,
                label: ex.label,
                probability,
                predicted: Label::from_probability(probability),
            })
        })
        .collect()
}

/// Evaluates a single labeled set, treated as test data.
pub fn evaluate(model: &Model, set: &[Example]) -> Result<RunReport> {
    if set.is_empty() {
        return Err(PipelineError::EmptySet);
    }
    Ok(RunReport::new(predict_set(model, set, Role::Test)?, 0, serde_json::Value::Null))
}

/// Evaluates training and test sets together.
pub fn evaluate_split(
    model: &Model,
    train: &[Example],
    test: &[Example],
    seed: u64,
    config: serde_json::Value,
) -> Result<RunReport> {
    if train.is_empty() && test.is_empty() {
        return Err(PipelineError::EmptySet);
    }
    let mut records = predict_set(model, train, Role::Train)?;
    records.extend(predict_set(model, test, Role::Test)?);
    Ok(RunReport::new(records, seed, config))
}
