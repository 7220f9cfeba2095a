//! Run configuration: a JSON file mirroring the pipeline flags, merged under
//! the flags actually given on the command line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semlabel::evaluate::{PipelineConfig, RebalanceLevel};
use semlabel::models::{ForestConfig, MlpConfig, ModelConfig, ModelKind};
use semlabel::sampling::{BagConfig, RebalanceStrategy};
use semlabel::FeatureSet;

use crate::args::{HoldoutArgs, PipelineArgs};
use crate::CliError;

/// Contents of a `--config` file. Every field is optional; relative paths
/// are resolved against the working directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub model: Option<String>,
    pub features: Option<String>,
    pub num_bags: Option<usize>,
    pub bag_size: Option<usize>,
    pub predict_bagging: Option<bool>,
    pub rebalance: Option<String>,
    pub rebalance_level: Option<String>,
    pub include_unknown: Option<bool>,
    pub seed: Option<u64>,
    pub lenient: Option<bool>,
    pub delimiter: Option<char>,
    pub name_k: Option<usize>,
    pub trees: Option<usize>,
    pub epochs: Option<usize>,
    /// Full forest settings; `trees` and `seed` still apply on top.
    pub forest: Option<ForestConfig>,
    /// Full MLP settings; `epochs` and `seed` still apply on top.
    pub mlp: Option<MlpConfig>,
    pub protocol: Option<String>,
    pub p: Option<f64>,
    pub n: Option<usize>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        serde_json::from_slice(bytes)
            .map_err(|e| CliError::Usage(format!("invalid run configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::Usage(format!("{}: cannot read config: {e}", path.display())))?;
        Self::parse(&bytes)
    }
}

/// Pipeline settings after merging flags, config file and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub corpus: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub pipeline: PipelineConfig,
    pub seed_given: bool,
    pub lenient: bool,
    pub delimiter: u8,
    pub protocol: Option<String>,
    pub p: Option<f64>,
    pub n: Option<usize>,
    pub output: Option<PathBuf>,
}

fn parse_with<T: std::str::FromStr<Err = semlabel::Error>>(
    v: Option<String>,
) -> Result<Option<T>, CliError> {
    v.map(|s| s.parse::<T>().map_err(|e| CliError::Usage(e.to_string())))
        .transpose()
}

pub fn delimiter_byte(c: char) -> Result<u8, CliError> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CliError::Usage(format!("delimiter {c:?} is not a single ASCII byte")))
}

pub fn resolve(
    flags: &PipelineArgs,
    holdout: Option<&HoldoutArgs>,
    output: Option<&PathBuf>,
) -> Result<Resolved, CliError> {
    let file = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };

    let seed = flags.seed.or(file.seed);
    let kind: ModelKind =
        parse_with(flags.model.clone().or(file.model.clone()))?.unwrap_or(ModelKind::Rf);
    let trees = flags.trees.or(file.trees);
    let epochs = flags.epochs.or(file.epochs);
    let model = match kind {
        ModelKind::Rf => {
            let mut cfg = file.forest.clone().unwrap_or_default();
            if let Some(t) = trees {
                cfg.n_trees = t;
            }
            if cfg.n_trees == 0 {
                return Err(CliError::Usage("trees must be at least 1".into()));
            }
            ModelConfig::Rf(cfg)
        }
        ModelKind::Mlp => {
            let mut cfg = file.mlp.clone().unwrap_or_default();
            if let Some(e) = epochs {
                cfg.epochs = e;
            }
            ModelConfig::Mlp(cfg)
        }
    };
    let feature_set: FeatureSet =
        parse_with(flags.features.clone().or(file.features.clone()))?.unwrap_or(FeatureSet::All);

    let num_bags = flags.num_bags.or(file.num_bags);
    let bag_size = flags.bag_size.or(file.bag_size);
    let bagging = match (num_bags, bag_size) {
        (Some(n), Some(s)) => Some(
            BagConfig::new(n, s, seed.unwrap_or(0)).map_err(|e| CliError::Usage(e.to_string()))?,
        ),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "num_bags and bag_size must be given together".into(),
            ))
        }
    };
    let predict_bagging = flags
        .predict_bagging
        .or(file.predict_bagging)
        .unwrap_or(false);
    if predict_bagging && bagging.is_none() {
        return Err(CliError::Usage(
            "predict_bagging requires num_bags and bag_size".into(),
        ));
    }
    let rebalance: RebalanceStrategy =
        parse_with(flags.rebalance.clone().or(file.rebalance.clone()))?.unwrap_or_default();
    let rebalance_level = match flags
        .rebalance_level
        .clone()
        .or(file.rebalance_level.clone())
        .as_deref()
    {
        None | Some("instance") => RebalanceLevel::Instance,
        Some("attribute") => RebalanceLevel::Attribute,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown rebalance level {other:?} (expected instance or attribute)"
            )))
        }
    };
    let mut name_features = semlabel::featurize::NameFeatureConfig::default();
    if let Some(k) = flags.name_k.or(file.name_k) {
        name_features.k = k;
    }

    let pipeline = PipelineConfig {
        model,
        feature_set,
        bagging,
        predict_bagging,
        rebalance,
        rebalance_level,
        include_unknown: flags
            .include_unknown
            .or(file.include_unknown)
            .unwrap_or(true),
        name_features,
        seed: seed.unwrap_or(0),
    };
    pipeline
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;

    Ok(Resolved {
        corpus: flags.corpus.clone().or(file.corpus.clone()),
        labels: flags.labels.clone().or(file.labels.clone()),
        pipeline,
        seed_given: seed.is_some(),
        lenient: flags.lenient.or(file.lenient).unwrap_or(false),
        delimiter: delimiter_byte(flags.delimiter.or(file.delimiter).unwrap_or(','))?,
        protocol: file.protocol.clone(),
        p: holdout.and_then(|h| h.p).or(file.p),
        n: holdout.and_then(|h| h.n).or(file.n),
        output: output.cloned().or(file.output.clone()),
    })
}
