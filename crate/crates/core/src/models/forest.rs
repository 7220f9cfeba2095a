//! Random forest of CART classification trees split on Gini impurity.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Candidate features examined at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    /// `⌈√d⌉`.
    #[default]
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, width: usize) -> usize {
        let m = match self {
            FeaturesPerSplit::Sqrt => (width as f64).sqrt().ceil() as usize,
            FeaturesPerSplit::All => width,
            FeaturesPerSplit::Count(n) => n,
        };
        m.clamp(1, width.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: FeaturesPerSplit,
    /// Additive smoothing of leaf class counts.
    pub leaf_smoothing: f64,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 128,
            max_depth: None,
            min_samples_leaf: 1,
            features_per_split: FeaturesPerSplit::Sqrt,
            leaf_smoothing: 1.0,
            seed: 0,
        }
    }
}

impl ForestConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be positive".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be positive".into()));
        }
        if !(self.leaf_smoothing >= 0.0 && self.leaf_smoothing.is_finite()) {
            return Err(Error::Config(
                "leaf_smoothing must be finite and >= 0".into(),
            ));
        }
        if self.features_per_split == FeaturesPerSplit::Count(0) {
            return Err(Error::Config("features_per_split must be positive".into()));
        }
        Ok(())
    }
}

/// `1 - Σ (c/n)²`; zero for an empty node.
pub fn gini_impurity(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        /// Samples with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
        /// Gini impurity of the node.
        impurity: f64,
        /// Size-weighted Gini impurity of the two children.
        children_impurity: f64,
    },
    Leaf {
        dist: Vec<f64>,
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_distribution(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    i = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { dist, .. } => return dist,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Mean of the per-tree leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (o, p) in out.iter_mut().zip(tree.leaf_distribution(x)) {
                *o += p;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }
}

/// Column-major view of the training matrix.
struct Columns<'a> {
    data: &'a [f64],
    rows: usize,
}

impl Columns<'_> {
    fn value(&self, feature: usize, row: usize) -> f64 {
        self.data[feature * self.rows + row]
    }
}

/// Trains a forest on row-major `rows` with class indices `targets`.
pub fn fit(
    rows: &[&[f64]],
    targets: &[usize],
    n_classes: usize,
    cfg: &ForestConfig,
) -> Result<Forest> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if rows.len() != targets.len() {
        return Err(Error::LengthMismatch(format!(
            "{} rows but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    let width = rows[0].len();
    let mut data = vec![0.0; width * rows.len()];
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: row.len(),
            });
        }
        for (f, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature {
                    instance: r,
                    feature: f,
                });
            }
            data[f * rows.len() + r] = v;
        }
    }
    let columns = Columns {
        data: &data,
        rows: rows.len(),
    };
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t as u64);
            let sample: Vec<usize> = (0..rows.len())
                .map(|_| rng.gen_range(0..rows.len()))
                .collect();
            TreeBuilder {
                columns: &columns,
                targets,
                n_classes,
                width,
                cfg,
                rng,
                nodes: Vec::new(),
            }
            .build(sample)
        })
        .collect();
    Ok(Forest {
        n_classes,
        n_features: width,
        trees,
    })
}

struct TreeBuilder<'a> {
    columns: &'a Columns<'a>,
    targets: &'a [usize],
    n_classes: usize,
    width: usize,
    cfg: &'a ForestConfig,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct Candidate {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                (self.score, self.feature, self.threshold).partial_cmp(&(
                    o.score,
                    o.feature,
                    o.threshold,
                )) == Some(std::cmp::Ordering::Less)
            }
        }
    }
}

impl TreeBuilder<'_> {
    fn build(mut self, sample: Vec<usize>) -> Tree {
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, sample, 0usize)];
        self.nodes.push(Node::Leaf {
            dist: Vec::new(),
            samples: 0,
        });
        let mut pairs: Vec<(f64, usize)> = Vec::new();
        while let Some((slot, samples, depth)) = stack.pop() {
            let counts = self.class_counts(&samples);
            let n = samples.len();
            let impurity = gini_impurity(&counts);
            let can_split = impurity > 0.0
                && n >= 2 * self.cfg.min_samples_leaf
                && self.cfg.max_depth.is_none_or(|d| depth < d);
            let split = if can_split {
                self.best_split(&samples, &counts, &mut pairs)
            } else {
                None
            };
            match split {
                None => self.nodes[slot] = self.leaf(&counts),
                Some(best) => {
                    let (left, right): (Vec<usize>, Vec<usize>) = samples
                        .iter()
                        .partition(|&&r| self.columns.value(best.feature, r) <= best.threshold);
                    let children_impurity = best.score / n as f64;
                    debug_assert!(children_impurity <= impurity + 1e-12);
                    let l = self.nodes.len();
                    let r = l + 1;
                    self.nodes.push(Node::Leaf {
                        dist: Vec::new(),
                        samples: 0,
                    });
                    self.nodes.push(Node::Leaf {
                        dist: Vec::new(),
                        samples: 0,
                    });
                    self.nodes[slot] = Node::Split {
                        feature: best.feature,
                        threshold: best.threshold,
                        left: l,
                        right: r,
                        impurity,
                        children_impurity,
                    };
                    stack.push((r, right, depth + 1));
                    stack.push((l, left, depth + 1));
                }
            }
        }
        Tree { nodes: self.nodes }
    }

    fn class_counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &r in samples {
            counts[self.targets[r]] += 1;
        }
        counts
    }

    fn leaf(&self, counts: &[usize]) -> Node {
        let n: usize = counts.iter().sum();
        let alpha = self.cfg.leaf_smoothing;
        let denom = n as f64 + alpha * self.n_classes as f64;
        Node::Leaf {
            dist: counts.iter().map(|&c| (c as f64 + alpha) / denom).collect(),
            samples: n,
        }
    }

    /// Lowest weighted child impurity over the sampled features. Features that
    /// are constant within the node do not count toward the sample size, as
    /// long as untried features remain.
    fn best_split(
        &mut self,
        samples: &[usize],
        counts: &[usize],
        pairs: &mut Vec<(f64, usize)>,
    ) -> Option<Candidate> {
        let mut order: Vec<usize> = (0..self.width).collect();
        order.shuffle(&mut self.rng);
        let wanted = self.cfg.features_per_split.resolve(self.width);
        let min_leaf = self.cfg.min_samples_leaf;
        let n = samples.len();
        let total_sq: u64 = counts.iter().map(|&c| (c * c) as u64).sum();

        let mut best: Option<Candidate> = None;
        let mut informative = 0;
        for &feature in &order {
            if informative >= wanted {
                break;
            }
            pairs.clear();
            pairs.extend(
                samples
                    .iter()
                    .map(|&r| (self.columns.value(feature, r), self.targets[r])),
            );
            pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            informative += 1;

            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.to_vec();
            let mut left_sq: u64 = 0;
            let mut right_sq: u64 = total_sq;
            for k in 1..n {
                let class = pairs[k - 1].1;
                left_sq += 2 * left[class] as u64 + 1;
                right_sq -= 2 * right[class] as u64 - 1;
                left[class] += 1;
                right[class] -= 1;
                if pairs[k - 1].0 == pairs[k].0 || k < min_leaf || n - k < min_leaf {
                    continue;
                }
                let (nl, nr) = (k as f64, (n - k) as f64);
                // n_l * gini_l + n_r * gini_r
                let score = (nl - left_sq as f64 / nl) + (nr - right_sq as f64 / nr);
                let (lo, hi) = (pairs[k - 1].0, pairs[k].0);
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                let candidate = Candidate {
                    score,
                    feature,
                    threshold,
                };
                if candidate.beats(&best) {
                    best = Some(candidate);
                }
            }
        }
        best
    }
}
