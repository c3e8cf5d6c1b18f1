use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Per-label probability mass; label ids are dense indices `0..len`.
///
/// Serialized as `{label → score}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, f64>", into = "BTreeMap<u32, f64>")]
pub struct ScoreDistribution {
    scores: Vec<f64>,
}

impl ScoreDistribution {
    /// Checks each score lies in `[0, 1]` and the total is `1 ± 1e-9`.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InvalidScores("no labels".into()));
        }
        if let Some((i, s)) = scores.iter().enumerate().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
            return Err(Error::InvalidScores(format!("score {s} for label {i} outside [0, 1]")));
        }
        let total: f64 = scores.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidScores(format!("scores sum to {total}")));
        }
        Ok(Self { scores })
    }

    pub fn uniform(n: usize) -> Self {
        Self { scores: vec![1.0 / n as f64; n] }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, label: u32) -> f64 {
        self.scores[label as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    /// Label with the highest score, lowest id on ties.
    pub fn argmax(&self) -> u32 {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > self.scores[best] {
                best = i;
            }
        }
        best as u32
    }
}

impl TryFrom<BTreeMap<u32, f64>> for ScoreDistribution {
    type Error = Error;

    fn try_from(map: BTreeMap<u32, f64>) -> Result<Self> {
        if map.keys().copied().ne(0..map.len() as u32) {
            return Err(Error::InvalidScores("labels must be 0..n without gaps".into()));
        }
        Self::new(map.into_values().collect())
    }
}

impl From<ScoreDistribution> for BTreeMap<u32, f64> {
    fn from(d: ScoreDistribution) -> Self {
        d.scores.into_iter().enumerate().map(|(i, s)| (i as u32, s)).collect()
    }
}

/// Cached classifier output: `{query_id → {label → score}}`.
pub type ScoreTable = BTreeMap<String, ScoreDistribution>;

pub fn write_score_table(path: &Path, table: &ScoreTable) -> Result<()> {
    let text = serde_json::to_string_pretty(table).map_err(|e| Error::json(path, e))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}
