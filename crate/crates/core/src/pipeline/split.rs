use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::rasterizer::ImageRGB;
use crate::record_io::{Label, LabelTable};

const TRAIN_HEALTHY: [&str; 8] = ["101", "113", "115", "117", "121", "122", "123", "230"];
const TEST_HEALTHY: [&str; 3] = ["103", "112", "234"];
const TRAIN_UNHEALTHY: [&str; 25] = [
    "106", "108", "109", "114", "116", "118", "119", "124", "201", "203", "205", "207", "208", "209", "214", "215",
    "219", "220", "221", "222", "223", "228", "231", "232", "233",
];
const TEST_UNHEALTHY: [&str; 8] = ["100", "105", "111", "200", "202", "210", "212", "213"];

/// Record ids assigned to training and testing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

impl Default for DatasetSplit {
    /// The 33/11 split of the 44 labeled MIT-BIH records.
    fn default() -> Self {
        let ids = |lists: [&[&str]; 2]| lists.concat().iter().map(|s| s.to_string()).collect();
        Self {
            train: ids([&TRAIN_HEALTHY, &TRAIN_UNHEALTHY]),
            test: ids([&TEST_HEALTHY, &TEST_UNHEALTHY]),
        }
    }
}

impl DatasetSplit {
    pub fn validate(&self) -> Result<()> {
        let train: BTreeSet<&String> = self.train.iter().collect();
        if train.len() != self.train.len() {
            return Err(PipelineError::InvalidSplit("duplicate training record".into()));
        }
        let test: BTreeSet<&String> = self.test.iter().collect();
        if test.len() != self.test.len() {
            return Err(PipelineError::InvalidSplit("duplicate test record".into()));
        }
        if let Some(id) = train.intersection(&test).next() {
            return Err(PipelineError::InvalidSplit(format!("record {id} in both sets")));
        }
        Ok(())
    }

    /// Keeps only test records in `ids`, leaving training untouched.
    pub fn restrict_test(&self, ids: &[String]) -> Self {
        Self {
            train: self.train.clone(),
            test: self.test.iter().filter(|id| ids.contains(id)).cloned().collect(),
        }
    }
}

/// One labeled image.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub record_id: String,
    pub label: Label,
    pub image: ImageRGB,
}

/// Pairs every split record with its image and label, in split order.
pub fn build_dataset(
    images: &BTreeMap<String, ImageRGB>,
    labels: &LabelTable,
    split: &DatasetSplit,
) -> Result<(Vec<Example>, Vec<Example>)> {
    split.validate()?;
    let collect = |ids: &[String]| {
        ids.iter()
            .map(|id| {
                let label = labels.get(id).ok_or_else(|| PipelineError::LabelMismatch(id.clone()))?;
                let image = images.get(id).ok_or_else(|| PipelineError::MissingImage(id.clone()))?;
                Ok(Example {
                    record_id: id.clone(),
                    label,
                    image: image.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    Ok((collect(&split.train)?, collect(&split.test)?))
}
