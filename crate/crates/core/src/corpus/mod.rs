//! Labeled collections of tabular data sources.

mod load;
pub mod synth;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{
    load_corpus, load_labels, load_source, parse_labels, parse_source, save_corpus, write_labels,
    LoadDiagnostics, LoadOptions, LoadedSource, LABELS_FILE, SOURCES_DIR,
};
pub use synth::{generate_synthetic, GeneratorKind, SynthLabel, SynthSpec};

/// Reserved class name that denotes the unknown label in label files.
pub const UNKNOWN: &str = "unknown";

/// One column of a data source: its header and raw cell values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub values: Vec<String>,
    pub source_name: String,
}

impl Attribute {
    pub fn new(
        source_name: impl Into<String>,
        name: impl Into<String>,
        values: Vec<String>,
    ) -> Self {
        Attribute {
            name: name.into(),
            values,
            source_name: source_name.into(),
        }
    }
}

/// Classification target: an ontology `(class, property)` pair or `Unknown`.
///
/// Labels order by their identifier string (see [`SemanticLabel::id`]); this
/// ordering fixes the class index used by every model and feature schema.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "LabelRepr", into = "LabelRepr")]
pub enum SemanticLabel {
    Known { class: String, property: String },
    Unknown,
}

#[derive(Serialize, Deserialize)]
struct LabelRepr {
    class: String,
    #[serde(default)]
    property: Option<String>,
}

impl TryFrom<LabelRepr> for SemanticLabel {
    type Error = String;

    fn try_from(repr: LabelRepr) -> std::result::Result<Self, String> {
        SemanticLabel::from_parts(&repr.class, repr.property.as_deref())
    }
}

impl From<SemanticLabel> for LabelRepr {
    fn from(label: SemanticLabel) -> Self {
        match label {
            SemanticLabel::Known { class, property } => LabelRepr {
                class,
                property: Some(property),
            },
            SemanticLabel::Unknown => LabelRepr {
                class: UNKNOWN.to_string(),
                property: None,
            },
        }
    }
}

impl SemanticLabel {
    pub fn known(class: impl Into<String>, property: impl Into<String>) -> Self {
        SemanticLabel::Known {
            class: class.into(),
            property: property.into(),
        }
    }

    /// Builds a label from label-file fields. `class == "unknown"` with no (or
    /// an empty) property yields [`SemanticLabel::Unknown`].
    pub fn from_parts(class: &str, property: Option<&str>) -> std::result::Result<Self, String> {
        let property = property.unwrap_or("");
        if class == UNKNOWN {
            if !property.is_empty() {
                return Err(format!(
                    "class \"unknown\" must not carry a property (got {property:?})"
                ));
            }
            return Ok(SemanticLabel::Unknown);
        }
        if class.is_empty() {
            return Err("label class must be non-empty".into());
        }
        if property.is_empty() {
            return Err(format!("label with class {class:?} has an empty property"));
        }
        Ok(SemanticLabel::known(class, property))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, SemanticLabel::Unknown)
    }

    /// `class.property` for known labels, `unknown` otherwise.
    pub fn id(&self) -> String {
        match self {
            SemanticLabel::Known { class, property } => format!("{class}.{property}"),
            SemanticLabel::Unknown => UNKNOWN.to_string(),
        }
    }
}

impl Ord for SemanticLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id()
            .cmp(&other.id())
            .then_with(|| match (self, other) {
                // ids can only collide for labels whose parts contain '.'
                (
                    SemanticLabel::Known {
                        class: a,
                        property: b,
                    },
                    SemanticLabel::Known {
                        class: c,
                        property: d,
                    },
                ) => (a, b).cmp(&(c, d)),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for SemanticLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemanticLabel::Known { class, property } => write!(f, "({class},{property})"),
            SemanticLabel::Unknown => f.write_str(UNKNOWN),
        }
    }
}

/// A named rectangular table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSource {
    pub name: String,
    pub attributes: Vec<Attribute>,
}

impl DataSource {
    /// Builds a source from named columns. Column names are de-duplicated and
    /// all columns must have the same length.
    pub fn new(name: impl Into<String>, columns: Vec<(String, Vec<String>)>) -> Result<Self> {
        let name = name.into();
        let rows = columns.first().map(|(_, v)| v.len());
        if let Some(rows) = rows {
            if let Some((col, v)) = columns.iter().find(|(_, v)| v.len() != rows) {
                return Err(Error::LengthMismatch(format!(
                    "column {col:?} of {name:?} has {} values, expected {rows}",
                    v.len()
                )));
            }
        }
        let headers: Vec<String> = columns.iter().map(|(h, _)| h.clone()).collect();
        let unique = dedup_names(&headers);
        let attributes = columns
            .into_iter()
            .zip(unique)
            .map(|((_, values), header)| Attribute::new(name.clone(), header, values))
            .collect();
        Ok(DataSource { name, attributes })
    }

    pub fn num_rows(&self) -> usize {
        self.attributes.first().map_or(0, |a| a.values.len())
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }
}

/// Makes header names unique by suffixing repeats with `_2`, `_3`, ... in
/// column order. The first occurrence keeps its name; generated names never
/// collide with any original header.
pub fn dedup_names(headers: &[String]) -> Vec<String> {
    let originals: HashSet<&str> = headers.iter().map(String::as_str).collect();
    let mut used: HashSet<String> = HashSet::with_capacity(headers.len());
    let mut out = Vec::with_capacity(headers.len());
    for header in headers {
        if used.insert(header.clone()) {
            out.push(header.clone());
            continue;
        }
        let mut k = 2usize;
        loop {
            let candidate = format!("{header}_{k}");
            if !originals.contains(candidate.as_str()) && !used.contains(&candidate) {
                used.insert(candidate.clone());
                out.push(candidate);
                break;
            }
            k += 1;
        }
    }
    out
}

/// Key of a label entry: `(source name, attribute name)`.
pub type AttributeKey = (String, String);

/// Label assignments keyed by `(source, attribute)`.
pub type LabelMap = BTreeMap<AttributeKey, SemanticLabel>;

/// What [`build_corpus`] does with attributes missing from the label map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelMode {
    #[default]
    Strict,
    /// Unlabeled attributes become [`SemanticLabel::Unknown`].
    Lenient,
}

/// Sources plus exactly one label per attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub sources: Vec<DataSource>,
    pub labels: LabelMap,
}

impl LabeledCorpus {
    pub fn label_of(&self, source: &str, attribute: &str) -> Option<&SemanticLabel> {
        self.labels
            .get(&(source.to_string(), attribute.to_string()))
    }

    pub fn label_for(&self, attr: &Attribute) -> &SemanticLabel {
        self.label_of(&attr.source_name, &attr.name)
            .expect("corpus invariant: every attribute is labeled")
    }

    /// Every attribute paired with its label, in source then column order.
    pub fn labeled_attributes(&self) -> impl Iterator<Item = (&Attribute, &SemanticLabel)> {
        self.sources
            .iter()
            .flat_map(|s| s.attributes.iter())
            .map(|a| (a, self.label_for(a)))
    }

    /// Distinct known labels, sorted.
    pub fn known_labels(&self) -> Vec<SemanticLabel> {
        let set: BTreeSet<&SemanticLabel> =
            self.labels.values().filter(|l| !l.is_unknown()).collect();
        set.into_iter().cloned().collect()
    }

    pub fn num_attributes(&self) -> usize {
        self.sources.iter().map(|s| s.attributes.len()).sum()
    }

    pub fn source(&self, name: &str) -> Option<&DataSource> {
        self.sources.iter().find(|s| s.name == name)
    }
}

/// Joins sources with a label map into a corpus.
pub fn build_corpus(
    sources: Vec<DataSource>,
    labels: LabelMap,
    mode: LabelMode,
) -> Result<LabeledCorpus> {
    let mut seen_sources = HashSet::new();
    for source in &sources {
        if !seen_sources.insert(source.name.as_str()) {
            return Err(Error::DuplicateSource(source.name.clone()));
        }
    }
    let mut present: HashSet<(&str, &str)> = HashSet::new();
    for source in &sources {
        for attr in &source.attributes {
            present.insert((source.name.as_str(), attr.name.as_str()));
        }
    }
    if let Some((source_name, attribute)) = labels
        .keys()
        .find(|(s, a)| !present.contains(&(s.as_str(), a.as_str())))
    {
        return Err(Error::DanglingLabel {
            source_name: source_name.clone(),
            attribute: attribute.clone(),
        });
    }
    let mut labels = labels;
    for source in &sources {
        for attr in &source.attributes {
            let key = (source.name.clone(), attr.name.clone());
            if labels.contains_key(&key) {
                continue;
            }
            match mode {
                LabelMode::Strict => {
                    return Err(Error::UnlabeledAttribute {
                        source_name: key.0,
                        attribute: key.1,
                    })
                }
                LabelMode::Lenient => {
                    labels.insert(key, SemanticLabel::Unknown);
                }
            }
        }
    }
    Ok(LabeledCorpus { sources, labels })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn dedup_appends_suffixes_in_column_order() {
        assert_eq!(dedup_names(&strings(&["x", "x"])), strings(&["x", "x_2"]));
        assert_eq!(
            dedup_names(&strings(&["x", "x", "x"])),
            strings(&["x", "x_2", "x_3"])
        );
        // generated names avoid originals that appear later
        assert_eq!(
            dedup_names(&strings(&["x", "x", "x_2"])),
            strings(&["x", "x_3", "x_2"])
        );
        assert_eq!(dedup_names(&strings(&["", ""])), strings(&["", "_2"]));
    }

    #[test]
    fn label_parts() {
        assert_eq!(
            SemanticLabel::from_parts("Person", Some("name")).unwrap(),
            SemanticLabel::known("Person", "name")
        );
        assert_eq!(
            SemanticLabel::from_parts("unknown", None).unwrap(),
            SemanticLabel::Unknown
        );
        assert!(SemanticLabel::from_parts("unknown", Some("x")).is_err());
        assert!(SemanticLabel::from_parts("", Some("x")).is_err());
        assert!(SemanticLabel::from_parts("Person", None).is_err());
    }

    #[test]
    fn labels_order_by_identifier() {
        let mut labels = [
            SemanticLabel::Unknown,
            SemanticLabel::known("Person", "name"),
            SemanticLabel::known("City", "name"),
            SemanticLabel::known("Person", "birthDate"),
        ];
        labels.sort();
        let ids: Vec<String> = labels.iter().map(SemanticLabel::id).collect();
        assert_eq!(
            ids,
            ["City.name", "Person.birthDate", "Person.name", "unknown"]
        );
    }

    #[test]
    fn label_json_shape() {
        let json = serde_json::to_string(&SemanticLabel::known("Person", "name")).unwrap();
        assert_eq!(json, r#"{"class":"Person","property":"name"}"#);
        let back: SemanticLabel = serde_json::from_str(r#"{"class":"unknown"}"#).unwrap();
        assert_eq!(back, SemanticLabel::Unknown);
    }

    fn employees() -> DataSource {
        DataSource::new(
            "Employees",
            vec![
                ("employer".into(), strings(&["CSIRO", "Data61", "NICTA"])),
                ("employee".into(), strings(&["Neil", "Mary", "Henry"])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn strict_mode_rejects_unlabeled() {
        let mut labels = LabelMap::new();
        labels.insert(
            ("Employees".into(), "employer".into()),
            SemanticLabel::known("Organization", "name"),
        );
        let err = build_corpus(vec![employees()], labels.clone(), LabelMode::Strict).unwrap_err();
        assert!(matches!(err, Error::UnlabeledAttribute { .. }));
        let corpus = build_corpus(vec![employees()], labels, LabelMode::Lenient).unwrap();
        assert_eq!(
            corpus.label_of("Employees", "employee"),
            Some(&SemanticLabel::Unknown)
        );
    }

    #[test]
    fn dangling_label_is_rejected() {
        let mut labels = LabelMap::new();
        labels.insert(("Employees".into(), "ghost".into()), SemanticLabel::Unknown);
        let err = build_corpus(vec![employees()], labels, LabelMode::Lenient).unwrap_err();
        assert!(matches!(err, Error::DanglingLabel { ref attribute, .. } if attribute == "ghost"));
    }

    #[test]
    fn ragged_columns_rejected_by_constructor() {
        let err = DataSource::new(
            "t",
            vec![
                ("a".into(), strings(&["1", "2"])),
                ("b".into(), strings(&["1"])),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::LengthMismatch(_)));
    }
}
