//! Classifiers over feature vectors and their persistence.

pub mod forest;
pub mod mlp;
mod persist;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use forest::{gini_impurity, FeaturesPerSplit, Forest, ForestConfig};
pub use mlp::{Mlp, MlpConfig};
pub use persist::{
    decode_model, encode_model, load_model, model_to_json, save_model, FORMAT_VERSION, MAGIC,
};

use crate::corpus::SemanticLabel;
use crate::error::{Error, Result};
use crate::featurize::{FeatureSchema, FeatureVector, Featurizer};

/// Feature vectors paired with their labels.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    instances: Vec<FeatureVector>,
    targets: Vec<SemanticLabel>,
    label_order: Vec<SemanticLabel>,
    target_index: Vec<usize>,
    schema: Arc<FeatureSchema>,
}

impl TrainingSet {
    /// Validates and indexes a training set. The label order is the sorted set
    /// of distinct targets.
    pub fn new(instances: Vec<FeatureVector>, targets: Vec<SemanticLabel>) -> Result<Self> {
        if instances.len() != targets.len() {
            return Err(Error::LengthMismatch(format!(
                "{} instances but {} targets",
                instances.len(),
                targets.len()
            )));
        }
        let first = instances.first().ok_or(Error::EmptyTrainingSet)?;
        let schema = Arc::clone(&first.schema);
        for fv in &instances {
            if !Arc::ptr_eq(&fv.schema, &schema) && *fv.schema != *schema {
                return Err(Error::SchemaMismatch(
                    "training instances do not share one feature schema".into(),
                ));
            }
            if fv.values.len() != schema.len() {
                return Err(Error::WidthMismatch {
                    expected: schema.len(),
                    found: fv.values.len(),
                });
            }
        }
        let label_order: Vec<SemanticLabel> = targets
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let target_index = targets
            .iter()
            .map(|t| label_order.binary_search(t).expect("label present"))
            .collect();
        Ok(TrainingSet {
            instances,
            targets,
            label_order,
            target_index,
            schema,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn label_order(&self) -> &[SemanticLabel] {
        &self.label_order
    }

    pub fn targets(&self) -> &[SemanticLabel] {
        &self.targets
    }

    pub fn schema(&self) -> &Arc<FeatureSchema> {
        &self.schema
    }

    /// Instances per label, in label order.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_order.len()];
        for &t in &self.target_index {
            counts[t] += 1;
        }
        counts
    }

    fn rows(&self) -> Vec<&[f64]> {
        self.instances
            .iter()
            .map(|fv| fv.values.as_slice())
            .collect()
    }

    fn require_two_classes(&self) -> Result<()> {
        if self.label_order.len() < 2 {
            return Err(Error::SingleClass(
                self.label_order.first().map(|l| l.id()).unwrap_or_default(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[serde(alias = "forest")]
    Rf,
    Mlp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Rf => "rf",
            ModelKind::Mlp => "mlp",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" | "forest" => Ok(ModelKind::Rf),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::Config(format!(
                "unknown model {other:?} (expected rf or mlp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelConfig {
    Rf(ForestConfig),
    Mlp(MlpConfig),
}

impl ModelConfig {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelConfig::Rf(_) => ModelKind::Rf,
            ModelConfig::Mlp(_) => ModelKind::Mlp,
        }
    }

    pub fn with_seed(&self, seed: u64) -> ModelConfig {
        let mut cfg = self.clone();
        match &mut cfg {
            ModelConfig::Rf(c) => c.seed = seed,
            ModelConfig::Mlp(c) => c.seed = seed,
        }
        cfg
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Rf(ForestConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Forest(Forest),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub config: ModelConfig,
    pub instances: usize,
    pub class_counts: Vec<usize>,
}

/// A trained classifier over a fixed label order and feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub label_order: Vec<SemanticLabel>,
    pub schema: FeatureSchema,
    pub params: ModelParams,
    pub meta: TrainingMeta,
    /// Featurizer that produced the training vectors, when attached.
    pub featurizer: Option<Featurizer>,
    /// Wall-clock training time; not persisted so model files stay reproducible.
    #[serde(skip)]
    pub train_seconds: f64,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self.params {
            ModelParams::Forest(_) => ModelKind::Rf,
            ModelParams::Mlp(_) => ModelKind::Mlp,
        }
    }

    /// Attaches the featurizer; its schema must equal the model schema.
    pub fn with_featurizer(mut self, featurizer: Featurizer) -> Result<Self> {
        if **featurizer.schema() != self.schema {
            return Err(Error::SchemaMismatch(
                "featurizer schema differs from the model schema".into(),
            ));
        }
        self.featurizer = Some(featurizer);
        Ok(self)
    }

    pub fn check_schema(&self, schema: &FeatureSchema) -> Result<()> {
        if schema.set != self.schema.set {
            return Err(Error::SchemaMismatch(format!(
                "model uses feature set {}, vector uses {}",
                self.schema.set, schema.set
            )));
        }
        if *schema != self.schema {
            return Err(Error::SchemaMismatch(format!(
                "vector has {} features, model expects {} (or feature names differ)",
                schema.len(),
                self.schema.len()
            )));
        }
        Ok(())
    }

    /// Probability per label in `label_order`.
    pub fn predict_proba(&self, fv: &FeatureVector) -> Result<Vec<f64>> {
        self.check_schema(&fv.schema)?;
        Ok(self.predict_values(&fv.values))
    }

    /// Prediction for raw values laid out in the model schema.
    pub fn predict_values(&self, values: &[f64]) -> Vec<f64> {
        match &self.params {
            ModelParams::Forest(f) => f.predict_proba(values),
            ModelParams::Mlp(m) => m.predict_proba(values),
        }
    }
}

fn finish(
    data: &TrainingSet,
    params: ModelParams,
    config: ModelConfig,
    started: Instant,
) -> TrainedModel {
    TrainedModel {
        label_order: data.label_order.clone(),
        schema: (*data.schema).clone(),
        params,
        meta: TrainingMeta {
            config,
            instances: data.len(),
            class_counts: data.class_counts(),
        },
        featurizer: None,
        train_seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn train_forest(data: &TrainingSet, cfg: &ForestConfig) -> Result<TrainedModel> {
    data.require_two_classes()?;
    let started = Instant::now();
    let forest = forest::fit(
        &data.rows(),
        &data.target_index,
        data.label_order.len(),
        cfg,
    )?;
    Ok(finish(
        data,
        ModelParams::Forest(forest),
        ModelConfig::Rf(cfg.clone()),
        started,
    ))
}

pub fn train_mlp(data: &TrainingSet, cfg: &MlpConfig) -> Result<TrainedModel> {
    data.require_two_classes()?;
    let started = Instant::now();
    let net = mlp::fit(
        &data.rows(),
        &data.target_index,
        data.label_order.len(),
        cfg,
    )?;
    Ok(finish(
        data,
        ModelParams::Mlp(net),
        ModelConfig::Mlp(cfg.clone()),
        started,
    ))
}

pub fn train(data: &TrainingSet, cfg: &ModelConfig) -> Result<TrainedModel> {
    match cfg {
        ModelConfig::Rf(c) => train_forest(data, c),
        ModelConfig::Mlp(c) => train_mlp(data, c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featurize::FeatureSet;

    fn dataset(xs: &[f64]) -> TrainingSet {
        let schema = Arc::new(FeatureSchema {
            set: FeatureSet::Base,
            names: vec!["x".into()],
        });
        let a = SemanticLabel::known("A", "a");
        let b = SemanticLabel::known("B", "b");
        let instances = xs
            .iter()
            .map(|&x| FeatureVector {
                schema: Arc::clone(&schema),
                values: vec![x],
            })
            .collect();
        let targets = xs
            .iter()
            .map(|&x| if x <= 0.0 { a.clone() } else { b.clone() })
            .collect();
        TrainingSet::new(instances, targets).unwrap()
    }

    #[test]
    fn single_class_is_rejected() {
        let data = dataset(&[-1.0, -2.0]);
        assert!(matches!(
            train_forest(&data, &ForestConfig::default()),
            Err(Error::SingleClass(_))
        ));
        assert!(matches!(
            train_mlp(&data, &MlpConfig::default()),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn separable_training_accuracy() {
        let data = dataset(&[-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
        let model = train_forest(&data, &ForestConfig::default()).unwrap();
        assert_eq!(model.meta.class_counts, vec![3, 3]);
        for fv in &data.instances {
            let p = model.predict_proba(fv).unwrap();
            let expected = usize::from(fv.values[0] > 0.0);
            assert!(p[expected] > p[1 - expected]);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let data = dataset(&[-1.0, 1.0]);
        let model = train_forest(&data, &ForestConfig::default()).unwrap();
        let other = FeatureVector {
            schema: Arc::new(FeatureSchema {
                set: FeatureSet::Base,
                names: vec!["y".into()],
            }),
            values: vec![0.0],
        };
        assert!(matches!(
            model.predict_proba(&other),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn mixed_schemas_are_rejected() {
        let s1 = Arc::new(FeatureSchema {
            set: FeatureSet::Base,
            names: vec!["x".into()],
        });
        let s2 = Arc::new(FeatureSchema {
            set: FeatureSet::Base,
            names: vec!["y".into()],
        });
        let fv = |s: &Arc<FeatureSchema>| FeatureVector {
            schema: Arc::clone(s),
            values: vec![0.0],
        };
        let l = SemanticLabel::known("A", "a");
        assert!(TrainingSet::new(vec![fv(&s1), fv(&s2)], vec![l.clone(), l]).is_err());
        assert!(TrainingSet::new(vec![], vec![]).is_err());
    }
}
