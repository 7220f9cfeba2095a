//! Ranked predictions and mean reciprocal rank.

use serde::{Deserialize, Serialize};

use crate::corpus::SemanticLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLabel {
    pub label: SemanticLabel,
    pub probability: f64,
}

/// Labels of one attribute ordered by descending probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRanking {
    pub source: String,
    pub attribute: String,
    pub ranked: Vec<RankedLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_label: Option<SemanticLabel>,
}

impl PredictionRanking {
    /// Sorts `labels` by descending probability; equal probabilities keep
    /// lexicographic label order.
    pub fn from_probabilities(
        source: impl Into<String>,
        attribute: impl Into<String>,
        labels: &[SemanticLabel],
        probabilities: &[f64],
        true_label: Option<SemanticLabel>,
    ) -> Result<Self> {
        if labels.len() != probabilities.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels but {} probabilities",
                labels.len(),
                probabilities.len()
            )));
        }
        let mut ranked: Vec<RankedLabel> = labels
            .iter()
            .zip(probabilities)
            .map(|(label, &probability)| RankedLabel {
                label: label.clone(),
                probability,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.probability
                .total_cmp(&a.probability)
                .then_with(|| a.label.cmp(&b.label))
        });
        Ok(PredictionRanking {
            source: source.into(),
            attribute: attribute.into(),
            ranked,
            true_label,
        })
    }

    pub fn top(&self) -> Option<&SemanticLabel> {
        self.ranked.first().map(|r| &r.label)
    }

    /// 1-based rank of `label`, `None` when the label is not ranked.
    pub fn rank_of(&self, label: &SemanticLabel) -> Option<usize> {
        self.ranked
            .iter()
            .position(|r| &r.label == label)
            .map(|p| p + 1)
    }

    /// Reciprocal rank of the true label; 0 when it is not among the ranked labels.
    pub fn reciprocal_rank(&self) -> Result<f64> {
        let truth = self.true_label.as_ref().ok_or_else(|| {
            Error::MissingTrueLabel(format!("{}/{}", self.source, self.attribute))
        })?;
        Ok(self.rank_of(truth).map_or(0.0, |r| 1.0 / r as f64))
    }

    pub fn truncate(&mut self, top: usize) {
        self.ranked.truncate(top);
    }
}

/// Mean reciprocal rank over rankings that all carry a true label.
pub fn mrr(rankings: &[PredictionRanking]) -> Result<f64> {
    if rankings.is_empty() {
        return Err(Error::EmptyRankings);
    }
    let mut total = 0.0;
    for r in rankings {
        total += r.reciprocal_rank()?;
    }
    Ok(total / rankings.len() as f64)
}
