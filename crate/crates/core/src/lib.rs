//! Supervised semantic labeling for tabular data sources.
//!
//! Columns (attributes) of relational sources are mapped to ontology labels
//! `(class, property)` or to a distinguished `unknown` label. The crate covers
//! the whole pipeline:
//!
//! * [`corpus`]: data model, CSV / label-file ingestion and a deterministic
//!   synthetic corpus generator.
//! * [`featurize`]: character distributions, Shannon entropy, column
//!   statistics and class-conditional similarity features.
//! * [`sampling`]: bagging of attribute rows and class rebalancing.
//! * [`models`]: random forest and multilayer perceptron classifiers with a
//!   versioned binary model file.
//! * [`evaluate`]: MRR scoring, leave-one-out and repeated-holdout protocols,
//!   bagging sweeps and report rendering.

pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod featurize;
pub mod models;
pub mod rng;
pub mod sampling;

pub use corpus::{Attribute, DataSource, LabeledCorpus, SemanticLabel};
pub use error::{Error, ErrorKind, Result};
pub use featurize::{FeatureSet, FeatureVector, Featurizer};
pub use models::TrainedModel;
