//! Bagging of attribute rows and class rebalancing of training instances.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Attribute, SemanticLabel};
use crate::error::{Error, Result};
use crate::rng::{stable_id, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagConfig {
    /// Bags generated per attribute.
    pub num_bags: usize,
    /// Rows sampled (with replacement) per bag.
    pub bag_size: usize,
    pub seed: u64,
}

impl BagConfig {
    pub fn new(num_bags: usize, bag_size: usize, seed: u64) -> Result<Self> {
        let cfg = BagConfig {
            num_bags,
            bag_size,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bags == 0 || self.bag_size == 0 {
            return Err(Error::Config(format!(
                "num_bags and bag_size must be positive (got {} and {})",
                self.num_bags, self.bag_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bag {
    /// `(source name, attribute name)` of the sampled attribute.
    pub parent: (String, String),
    /// Attribute name, copied verbatim.
    pub name: String,
    pub values: Vec<String>,
    /// Row positions in the parent the values were taken from.
    pub rows: Vec<usize>,
}

/// Which pipeline stage draws the bags; train and predict use distinct streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Predict,
}

impl Phase {
    fn as_str(self) -> &'static str {
        match self {
            Phase::Train => "train",
            Phase::Predict => "predict",
        }
    }
}

/// Stable random-stream id for one attribute in one phase.
pub fn stream_id(source_name: &str, attribute_name: &str, phase: Phase) -> u64 {
    stable_id(&[source_name, attribute_name, phase.as_str()])
}

/// Row indices of `cfg.num_bags` bags over a column of `rows` rows.
pub fn bag_rows(rows: usize, cfg: &BagConfig, stream_id: u64) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    if rows == 0 {
        return Err(Error::EmptyAttribute(String::new()));
    }
    let mut rng = stream_rng(cfg.seed, stream_id);
    Ok((0..cfg.num_bags)
        .map(|_| (0..cfg.bag_size).map(|_| rng.gen_range(0..rows)).collect())
        .collect())
}

/// Samples `cfg.num_bags` bags of `cfg.bag_size` values with replacement.
pub fn make_bags(attr: &Attribute, cfg: &BagConfig, stream_id: u64) -> Result<Vec<Bag>> {
    if attr.values.is_empty() {
        return Err(Error::EmptyAttribute(attr.name.clone()));
    }
    let parent = (attr.source_name.clone(), attr.name.clone());
    Ok(bag_rows(attr.values.len(), cfg, stream_id)?
        .into_iter()
        .map(|rows| Bag {
            parent: parent.clone(),
            name: attr.name.clone(),
            values: rows.iter().map(|&r| attr.values[r].clone()).collect(),
            rows,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RebalanceStrategy {
    #[default]
    None,
    /// Every class resampled to the rounded mean class count.
    #[serde(alias = "resample_to_mean")]
    Mean,
    /// Every class upsampled to the largest class count.
    #[serde(alias = "resample_to_max")]
    Max,
}

impl fmt::Display for RebalanceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RebalanceStrategy::None => "none",
            RebalanceStrategy::Mean => "mean",
            RebalanceStrategy::Max => "max",
        })
    }
}

impl FromStr for RebalanceStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(RebalanceStrategy::None),
            "mean" | "resample_to_mean" => Ok(RebalanceStrategy::Mean),
            "max" | "resample_to_max" => Ok(RebalanceStrategy::Max),
            other => Err(Error::Config(format!(
                "unknown rebalance strategy {other:?} (expected none, mean or max)"
            ))),
        }
    }
}

/// Target count per class for a strategy; `None` for [`RebalanceStrategy::None`].
pub fn rebalance_target(counts: &[usize], strategy: RebalanceStrategy) -> Option<usize> {
    match strategy {
        RebalanceStrategy::None => None,
        RebalanceStrategy::Mean => {
            let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
            Some(mean.round_ties_even() as usize)
        }
        RebalanceStrategy::Max => counts.iter().copied().max(),
    }
}

/// Equalizes class counts.
///
/// Classes above the target are downsampled without replacement (survivors
/// keep their relative order); classes below are topped up with uniform
/// draws with replacement. Output is grouped by class in label order.
pub fn rebalance<T: Clone>(
    instances: Vec<(T, SemanticLabel)>,
    strategy: RebalanceStrategy,
    seed: u64,
) -> Vec<(T, SemanticLabel)> {
    if strategy == RebalanceStrategy::None || instances.is_empty() {
        return instances;
    }
    let mut groups: BTreeMap<SemanticLabel, Vec<T>> = BTreeMap::new();
    for (item, label) in instances {
        groups.entry(label).or_default().push(item);
    }
    let counts: Vec<usize> = groups.values().map(Vec::len).collect();
    let target = rebalance_target(&counts, strategy).expect("strategy is not None");

    let mut out = Vec::with_capacity(target * groups.len());
    for (label, items) in groups {
        let mut rng = stream_rng(seed, stable_id(&["rebalance", &label.id()]));
        let n = items.len();
        if n > target {
            let mut keep = index::sample(&mut rng, n, target).into_vec();
            keep.sort_unstable();
            out.extend(keep.into_iter().map(|i| (items[i].clone(), label.clone())));
        } else {
            let extra: Vec<T> = (0..target - n)
                .map(|_| items[rng.gen_range(0..n)].clone())
                .collect();
            out.extend(items.into_iter().chain(extra).map(|it| (it, label.clone())));
        }
    }
    out
}

/// Element-wise mean of per-bag probability vectors.
pub fn aggregate_bag_predictions(per_bag: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = per_bag
        .first()
        .ok_or_else(|| Error::LengthMismatch("no bag predictions to aggregate".into()))?;
    let width = first.len();
    let mut mean = vec![0.0; width];
    for probs in per_bag {
        if probs.len() != width {
            return Err(Error::LengthMismatch(format!(
                "bag prediction of length {} among vectors of length {width}",
                probs.len()
            )));
        }
        for (m, p) in mean.iter_mut().zip(probs) {
            *m += p;
        }
    }
    let n = per_bag.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    Ok(mean)
}
