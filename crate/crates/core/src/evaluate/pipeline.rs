//! Training and prediction over attributes: featurization, bagging,
//! rebalancing and model fitting as one configurable pipeline.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ranking::PredictionRanking;
use crate::corpus::{Attribute, SemanticLabel};
use crate::error::{Error, Result};
use crate::featurize::{
    build_class_profiles, ColumnSummary, FeatureSet, FeatureVector, Featurizer, NameFeatureConfig,
};
use crate::models::{self, ModelConfig, TrainedModel, TrainingSet};
use crate::rng::{mix, stable_id};
use crate::sampling::{
    aggregate_bag_predictions, bag_rows, rebalance, stream_id, BagConfig, Phase, RebalanceStrategy,
};

/// Whether rebalancing runs on bag instances or on whole attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RebalanceLevel {
    #[default]
    Instance,
    Attribute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelConfig,
    pub feature_set: FeatureSet,
    /// Training-time bagging; `None` uses each attribute as one instance.
    pub bagging: Option<BagConfig>,
    /// Also bag at prediction time, with the training bag parameters.
    pub predict_bagging: bool,
    pub rebalance: RebalanceStrategy,
    pub rebalance_level: RebalanceLevel,
    pub include_unknown: bool,
    pub name_features: NameFeatureConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            model: ModelConfig::default(),
            feature_set: FeatureSet::All,
            bagging: None,
            predict_bagging: false,
            rebalance: RebalanceStrategy::None,
            rebalance_level: RebalanceLevel::Instance,
            include_unknown: true,
            name_features: NameFeatureConfig::default(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(bags) = &self.bagging {
            bags.validate()?;
        } else if self.predict_bagging {
            return Err(Error::Config(
                "predict_bagging requires num_bags and bag_size".into(),
            ));
        }
        if self.name_features.k == 0 {
            return Err(Error::Config("name feature k must be at least 1".into()));
        }
        if let ModelConfig::Mlp(m) = &self.model {
            if !(0.0..1.0).contains(&m.dropout) {
                return Err(Error::Config(format!(
                    "dropout {} outside [0, 1)",
                    m.dropout
                )));
            }
        }
        Ok(())
    }

    /// Bag parameters used at prediction time, if any.
    pub fn predict_bags(&self) -> Option<&BagConfig> {
        self.bagging.as_ref().filter(|_| self.predict_bagging)
    }
}

/// A fitted model plus the sources whose attributes shaped it.
#[derive(Debug, Clone)]
pub struct TrainedPipeline {
    pub model: TrainedModel,
    /// Sources that contributed to class profiles, rebalancing or instances.
    pub provenance: BTreeSet<String>,
    pub instances: usize,
}

/// Trains on `train` with the pipeline settings; `salt` separates the model
/// seeds of different folds.
pub fn train_pipeline(
    train: &[(&Attribute, &SemanticLabel)],
    cfg: &PipelineConfig,
    salt: u64,
) -> Result<TrainedPipeline> {
    cfg.validate()?;
    let mut attrs: Vec<(&Attribute, &SemanticLabel)> = train
        .iter()
        .copied()
        .filter(|(_, l)| cfg.include_unknown || !l.is_unknown())
        .collect();
    if attrs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut provenance: BTreeSet<String> =
        attrs.iter().map(|(a, _)| a.source_name.clone()).collect();

    let index = if cfg.feature_set.needs_index() {
        Some(build_class_profiles(attrs.iter().copied())?)
    } else {
        None
    };
    let featurizer = Featurizer::new(cfg.feature_set, index, cfg.name_features)?;

    if cfg.rebalance_level == RebalanceLevel::Attribute {
        let seed = mix(cfg.seed, stable_id(&["rebalance-attributes"]) ^ salt);
        let owned: Vec<(usize, SemanticLabel)> = attrs
            .iter()
            .enumerate()
            .map(|(i, (_, l))| (i, (*l).clone()))
            .collect();
        let picked = rebalance(owned, cfg.rebalance, seed);
        attrs = picked.into_iter().map(|(i, _)| attrs[i]).collect();
        provenance = attrs.iter().map(|(a, _)| a.source_name.clone()).collect();
    }

    let per_attr: Vec<Vec<FeatureVector>> = attrs
        .par_iter()
        .map(|(attr, _)| featurize_for_training(attr, &featurizer, cfg.bagging.as_ref()))
        .collect::<Result<_>>()?;
    let mut instances: Vec<(FeatureVector, SemanticLabel)> = per_attr
        .into_iter()
        .zip(&attrs)
        .flat_map(|(vs, (_, label))| vs.into_iter().map(move |v| (v, (*label).clone())))
        .collect();

    if cfg.rebalance_level == RebalanceLevel::Instance {
        let seed = mix(cfg.seed, stable_id(&["rebalance-instances"]) ^ salt);
        instances = rebalance(instances, cfg.rebalance, seed);
    }
    let count = instances.len();
    let (vectors, targets): (Vec<_>, Vec<_>) = instances.into_iter().unzip();
    let data = TrainingSet::new(vectors, targets)?;
    let model_cfg = cfg.model.with_seed(mix(cfg.seed, salt));
    let model = models::train(&data, &model_cfg)?.with_featurizer(featurizer)?;
    Ok(TrainedPipeline {
        model,
        provenance,
        instances: count,
    })
}

fn featurize_for_training(
    attr: &Attribute,
    featurizer: &Featurizer,
    bagging: Option<&BagConfig>,
) -> Result<Vec<FeatureVector>> {
    if attr.values.is_empty() {
        return Err(Error::EmptyAttribute(attr.name.clone()));
    }
    let column = ColumnSummary::new(&attr.values);
    let row_sets = match bagging {
        Some(cfg) => bag_rows(
            attr.values.len(),
            cfg,
            stream_id(&attr.source_name, &attr.name, Phase::Train),
        )?,
        None => vec![column.all_rows()],
    };
    Ok(featurizer.featurize_row_sets(&attr.name, &column, &row_sets))
}

/// Ranks the model labels for one attribute, optionally averaging over
/// prediction-time bags.
pub fn predict_attribute(
    model: &TrainedModel,
    attr: &Attribute,
    featurizer: &Featurizer,
    bagging: Option<&BagConfig>,
) -> Result<PredictionRanking> {
    model.check_schema(featurizer.schema())?;
    if attr.values.is_empty() {
        return Err(Error::EmptyAttribute(attr.name.clone()));
    }
    let column = ColumnSummary::new(&attr.values);
    let probabilities = match bagging {
        Some(cfg) => {
            let rows = bag_rows(
                attr.values.len(),
                cfg,
                stream_id(&attr.source_name, &attr.name, Phase::Predict),
            )?;
            let per_bag: Vec<Vec<f64>> = featurizer
                .featurize_row_sets(&attr.name, &column, &rows)
                .iter()
                .map(|fv| model.predict_values(&fv.values))
                .collect();
            aggregate_bag_predictions(&per_bag)?
        }
        None => {
            let fv = featurizer
                .featurize_row_sets(&attr.name, &column, &[column.all_rows()])
                .pop()
                .expect("one vector");
            model.predict_values(&fv.values)
        }
    };
    PredictionRanking::from_probabilities(
        attr.source_name.clone(),
        attr.name.clone(),
        &model.label_order,
        &probabilities,
        None,
    )
}

/// [`predict_attribute`] with the featurizer stored in the model.
pub fn predict_with_model(
    model: &TrainedModel,
    attr: &Attribute,
    bagging: Option<&BagConfig>,
) -> Result<PredictionRanking> {
    let featurizer = model
        .featurizer
        .as_ref()
        .ok_or_else(|| Error::SchemaMismatch("model file carries no featurizer".into()))?;
    predict_attribute(model, attr, featurizer, bagging)
}

/// Timed prediction of many attributes, in input order.
pub(crate) fn predict_all(
    model: &TrainedModel,
    attrs: &[(&Attribute, &SemanticLabel)],
    bagging: Option<&BagConfig>,
) -> Result<(Vec<PredictionRanking>, f64)> {
    let started = Instant::now();
    let rankings = attrs
        .par_iter()
        .map(|(attr, label)| {
            let mut r = predict_with_model(model, attr, bagging)?;
            r.true_label = Some((*label).clone());
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rankings, started.elapsed().as_secs_f64()))
}
