//! Class-conditional features: similarity of an attribute to the training
//! instances of every label.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::chars::{char_profile, CharProfile, VOCAB_SIZE};
use super::distance::{normalized_levenshtein, nw_similarity, NwScoring};
use crate::corpus::{Attribute, SemanticLabel};
use crate::error::{Error, Result};

/// Mean character distribution and member names for each training label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfileIndex {
    labels: Vec<SemanticLabel>,
    mean_dists: Vec<Vec<f64>>,
    /// Lower-cased attribute names of each label's members (a multiset).
    names: Vec<Vec<String>>,
}

impl ClassProfileIndex {
    pub fn labels(&self) -> &[SemanticLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn mean_dist(&self, i: usize) -> &[f64] {
        &self.mean_dists[i]
    }

    pub fn names(&self, i: usize) -> &[String] {
        &self.names[i]
    }

    pub fn position(&self, label: &SemanticLabel) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }
}

/// Builds per-label profiles from labeled training attributes.
pub fn build_class_profiles<'a, I>(train: I) -> Result<ClassProfileIndex>
where
    I: IntoIterator<Item = (&'a Attribute, &'a SemanticLabel)>,
{
    let mut groups: BTreeMap<SemanticLabel, (Vec<f64>, usize, Vec<String>)> = BTreeMap::new();
    for (attr, label) in train {
        let profile = char_profile(&attr.values);
        let entry = groups
            .entry(label.clone())
            .or_insert_with(|| (vec![0.0; VOCAB_SIZE], 0, Vec::new()));
        for (acc, p) in entry.0.iter_mut().zip(&profile.dist) {
            *acc += p;
        }
        entry.1 += 1;
        entry.2.push(attr.name.to_lowercase());
    }
    if groups.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut index = ClassProfileIndex {
        labels: Vec::with_capacity(groups.len()),
        mean_dists: Vec::with_capacity(groups.len()),
        names: Vec::with_capacity(groups.len()),
    };
    for (label, (sum, count, names)) in groups {
        let mut mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
        let total: f64 = mean.iter().sum();
        if total > 0.0 {
            mean.iter_mut().for_each(|p| *p /= total);
        }
        index.labels.push(label);
        index.mean_dists.push(mean);
        index.names.push(names);
    }
    Ok(index)
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Cosine similarity of the profile to every class mean, in index order.
pub fn cosine_features(profile: &CharProfile, index: &ClassProfileIndex) -> Vec<f64> {
    index
        .mean_dists
        .iter()
        .map(|mean| cosine(&profile.dist, mean))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NameFeatureConfig {
    /// Neighbours averaged by the alignment feature.
    pub k: usize,
    pub scoring: NwScoring,
}

impl Default for NameFeatureConfig {
    fn default() -> Self {
        NameFeatureConfig {
            k: 3,
            scoring: NwScoring::default(),
        }
    }
}

/// Per-label name features, both in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct NameFeatures {
    /// Smallest normalized edit distance to any member name.
    pub min_edit: Vec<f64>,
    /// Mean normalized alignment similarity of the `k` most similar member names.
    pub nw_knn: Vec<f64>,
}

pub fn name_features(
    name: &str,
    index: &ClassProfileIndex,
    config: NameFeatureConfig,
) -> NameFeatures {
    let name = name.to_lowercase();
    let k = config.k.max(1);
    let mut min_edit = Vec::with_capacity(index.len());
    let mut nw_knn = Vec::with_capacity(index.len());
    for reps in &index.names {
        let best_edit = reps
            .iter()
            .map(|rep| normalized_levenshtein(&name, rep))
            .fold(f64::INFINITY, f64::min);
        min_edit.push(if best_edit.is_finite() {
            best_edit
        } else {
            1.0
        });

        let mut sims: Vec<f64> = reps
            .iter()
            .map(|rep| nw_similarity(&name, rep, config.scoring))
            .collect();
        sims.sort_by(|a, b| b.total_cmp(a));
        let take = k.min(sims.len());
        nw_knn.push(if take == 0 {
            0.0
        } else {
            sims[..take].iter().sum::<f64>() / take as f64
        });
    }
    NameFeatures { min_edit, nw_knn }
}
