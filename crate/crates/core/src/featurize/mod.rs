//! Feature extraction for attributes and bags of attribute rows.
//!
//! Vector layout per feature set (`L` = number of training labels):
//!
//! | set         | layout                                                         |
//! |-------------|----------------------------------------------------------------|
//! | `base`      | chardist (100), entropy                                        |
//! | `base_plus` | chardist (100), entropy, min_edit (L)                          |
//! | `all`       | stats (26), chardist (100), entropy, cosine (L), min_edit (L), nw_knn (L) |

pub mod chars;
pub mod distance;
pub mod profiles;
pub mod stats;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use chars::{char_profile, CharProfile, VOCAB_SIZE};
pub use distance::{levenshtein, needleman_wunsch, NwScoring};
pub use profiles::{
    build_class_profiles, cosine_features, name_features, ClassProfileIndex, NameFeatureConfig,
    NameFeatures,
};
pub use stats::{ColumnSummary, StatFeatures, STAT_COUNT, STAT_NAMES};

use crate::corpus::{Attribute, SemanticLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// Character distribution and entropy.
    Base,
    /// `Base` plus per-label minimum edit distance of the attribute name.
    BasePlus,
    /// Column statistics, `Base`, and all class-similarity features.
    All,
}

impl FeatureSet {
    pub fn needs_index(self) -> bool {
        !matches!(self, FeatureSet::Base)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Base => "base",
            FeatureSet::BasePlus => "base_plus",
            FeatureSet::All => "all",
        }
    }

    /// Vector width for `labels` training labels.
    pub fn width(self, labels: usize) -> usize {
        match self {
            FeatureSet::Base => VOCAB_SIZE + 1,
            FeatureSet::BasePlus => VOCAB_SIZE + 1 + labels,
            FeatureSet::All => STAT_COUNT + VOCAB_SIZE + 1 + 3 * labels,
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(FeatureSet::Base),
            "base_plus" | "base+" => Ok(FeatureSet::BasePlus),
            "all" => Ok(FeatureSet::All),
            other => Err(Error::Config(format!(
                "unknown feature set {other:?} (expected base, base_plus or all)"
            ))),
        }
    }
}

/// Ordered feature names of a vector layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub set: FeatureSet,
    pub names: Vec<String>,
}

impl FeatureSchema {
    /// Schema for a feature set and label order; `labels` is ignored for `base`.
    pub fn new(set: FeatureSet, labels: &[SemanticLabel]) -> Self {
        let mut names = Vec::with_capacity(set.width(labels.len()));
        if set == FeatureSet::All {
            names.extend(STAT_NAMES.iter().map(|n| format!("stat:{n}")));
        }
        names.extend(chars::vocabulary().map(|c| format!("chardist:{:02x}", c as u32)));
        names.push("entropy".to_string());
        let per_label = |prefix: &str, names: &mut Vec<String>| {
            names.extend(labels.iter().map(|l| format!("{prefix}:{}", l.id())));
        };
        match set {
            FeatureSet::Base => {}
            FeatureSet::BasePlus => per_label("min_edit", &mut names),
            FeatureSet::All => {
                per_label("cosine", &mut names);
                per_label("min_edit", &mut names);
                per_label("nw_knn", &mut names);
            }
        }
        FeatureSchema { set, names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Numeric features of one attribute instance (a whole column or a bag).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema: Arc<FeatureSchema>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn feature_set(&self) -> FeatureSet {
        self.schema.set
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Turns attributes into feature vectors under a fixed schema.
///
/// For `base_plus` and `all` the featurizer carries the class profiles of the
/// training fold, and the schema is tied to their label order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "FeaturizerRepr", into = "FeaturizerRepr")]
pub struct Featurizer {
    set: FeatureSet,
    index: Option<ClassProfileIndex>,
    name_config: NameFeatureConfig,
    schema: Arc<FeatureSchema>,
}

#[derive(Clone, Serialize, Deserialize)]
struct FeaturizerRepr {
    set: FeatureSet,
    index: Option<ClassProfileIndex>,
    name_config: NameFeatureConfig,
}

impl From<FeaturizerRepr> for Featurizer {
    fn from(repr: FeaturizerRepr) -> Self {
        let labels = repr.index.as_ref().map_or(&[][..], |i| i.labels());
        let labels = if repr.set.needs_index() { labels } else { &[] };
        let schema = Arc::new(FeatureSchema::new(repr.set, labels));
        Featurizer {
            set: repr.set,
            index: repr.index,
            name_config: repr.name_config,
            schema,
        }
    }
}

impl From<Featurizer> for FeaturizerRepr {
    fn from(f: Featurizer) -> Self {
        FeaturizerRepr {
            set: f.set,
            index: f.index,
            name_config: f.name_config,
        }
    }
}

impl PartialEq for Featurizer {
    fn eq(&self, other: &Self) -> bool {
        self.set == other.set && self.index == other.index && self.name_config == other.name_config
    }
}

impl Featurizer {
    pub fn new(
        set: FeatureSet,
        index: Option<ClassProfileIndex>,
        name_config: NameFeatureConfig,
    ) -> Result<Self> {
        if set.needs_index() && index.as_ref().is_none_or(|i| i.is_empty()) {
            return Err(Error::Config(format!(
                "feature set {set} needs a non-empty class profile index"
            )));
        }
        if name_config.k == 0 {
            return Err(Error::Config("name feature k must be at least 1".into()));
        }
        Ok(FeaturizerRepr {
            set,
            index,
            name_config,
        }
        .into())
    }

    pub fn set(&self) -> FeatureSet {
        self.set
    }

    pub fn index(&self) -> Option<&ClassProfileIndex> {
        self.index.as_ref()
    }

    pub fn name_config(&self) -> NameFeatureConfig {
        self.name_config
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    /// Features of a whole attribute.
    pub fn featurize(&self, attr: &Attribute) -> Result<FeatureVector> {
        if attr.values.is_empty() {
            return Err(Error::EmptyAttribute(attr.name.clone()));
        }
        let column = ColumnSummary::new(&attr.values);
        let rows = column.all_rows();
        Ok(self
            .featurize_row_sets(&attr.name, &column, std::slice::from_ref(&rows))
            .pop()
            .expect("one row set in, one vector out"))
    }

    /// One vector per row subset of `column`. Name features depend only on
    /// the attribute name and are computed once.
    pub fn featurize_row_sets(
        &self,
        name: &str,
        column: &ColumnSummary,
        row_sets: &[Vec<usize>],
    ) -> Vec<FeatureVector> {
        let name_part = match (&self.index, self.set) {
            (Some(index), FeatureSet::BasePlus | FeatureSet::All) => {
                Some(name_features(name, index, self.name_config))
            }
            _ => None,
        };
        row_sets
            .iter()
            .map(|rows| {
                let mut values = Vec::with_capacity(self.schema.len());
                if self.set == FeatureSet::All {
                    values.extend(column.stat_features(rows).to_vec());
                }
                let profile = column.char_profile(rows);
                values.extend_from_slice(&profile.dist);
                values.push(profile.entropy);
                if let (Some(index), Some(names)) = (&self.index, &name_part) {
                    if self.set == FeatureSet::All {
                        values.extend(cosine_features(&profile, index));
                    }
                    values.extend_from_slice(&names.min_edit);
                    if self.set == FeatureSet::All {
                        values.extend_from_slice(&names.nw_knn);
                    }
                }
                debug_assert_eq!(values.len(), self.schema.len());
                FeatureVector {
                    schema: Arc::clone(&self.schema),
                    values,
                }
            })
            .collect()
    }
}

/// Column statistics of an attribute.
pub fn stat_features(attr: &Attribute) -> Result<StatFeatures> {
    if attr.values.is_empty() {
        return Err(Error::EmptyAttribute(attr.name.clone()));
    }
    let column = ColumnSummary::new(&attr.values);
    Ok(column.stat_features(&column.all_rows()))
}

/// One-off featurization of `attr`; `index` is required for `base_plus` and `all`.
pub fn assemble(
    attr: &Attribute,
    set: FeatureSet,
    index: Option<&ClassProfileIndex>,
) -> Result<FeatureVector> {
    let index = if set.needs_index() {
        index.cloned()
    } else {
        None
    };
    Featurizer::new(set, index, NameFeatureConfig::default())?.featurize(attr)
}
