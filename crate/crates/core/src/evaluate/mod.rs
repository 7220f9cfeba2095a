//! Benchmark harness: MRR scoring, leave-one-out and repeated-holdout
//! protocols, bagging sweeps and reports.

mod pipeline;
mod ranking;
mod report;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pipeline::{
    predict_attribute, predict_with_model, train_pipeline, PipelineConfig, RebalanceLevel,
    TrainedPipeline,
};
pub use ranking::{mrr, PredictionRanking, RankedLabel};
pub use report::{
    emit_report, load_report, AttributeOutcome, CorpusSummary, EvaluationReport, FoldResult,
    Protocol, ReportFormat, SkippedFold, UnknownSummary, REPORT_SCHEMA_VERSION,
};

use crate::corpus::{Attribute, LabeledCorpus, SemanticLabel};
use crate::error::{Error, Result};
use crate::rng::{stable_id, stream_rng};
use crate::sampling::BagConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutConfig {
    /// Fraction of sources used for training.
    pub p: f64,
    /// Number of iterations.
    pub n: usize,
    pub seed: u64,
}

impl HoldoutConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!(
                "p must lie in (0, 1), got {}",
                self.p
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(())
    }

    /// `ceil(p * sources)`, tolerant of representation error in `p`.
    pub fn train_count(&self, sources: usize) -> usize {
        (self.p * sources as f64 - 1e-9).ceil().max(0.0) as usize
    }
}

enum FoldOutcome {
    Done(FoldResult, UnknownSummary),
    Degenerate(String),
}

fn run_fold(
    corpus: &LabeledCorpus,
    fold: usize,
    test_sources: &BTreeSet<&str>,
    cfg: &PipelineConfig,
) -> Result<FoldOutcome> {
    let (train, test): (Vec<(&Attribute, &SemanticLabel)>, Vec<_>) = corpus
        .labeled_attributes()
        .filter(|(_, l)| cfg.include_unknown || !l.is_unknown())
        .partition(|(a, _)| !test_sources.contains(a.source_name.as_str()));
    let train_sources: Vec<String> = corpus
        .sources
        .iter()
        .map(|s| s.name.clone())
        .filter(|s| !test_sources.contains(s.as_str()))
        .collect();
    let classes: BTreeSet<&SemanticLabel> = train.iter().map(|(_, l)| *l).collect();
    if classes.len() < 2 {
        return Ok(FoldOutcome::Degenerate(format!(
            "training split has {} distinct label(s)",
            classes.len()
        )));
    }

    let started = Instant::now();
    let trained = train_pipeline(&train, cfg, fold as u64)?;
    let train_seconds = started.elapsed().as_secs_f64();
    if let Some(leak) = trained
        .provenance
        .iter()
        .find(|s| test_sources.contains(s.as_str()))
    {
        return Err(Error::Report(format!(
            "fold {fold}: test source {leak} contributed to training"
        )));
    }

    let (rankings, predict_seconds) =
        pipeline::predict_all(&trained.model, &test, cfg.predict_bags())?;
    let mut unknown = UnknownSummary::default();
    let mut attributes = Vec::with_capacity(rankings.len());
    for r in &rankings {
        let truth = r.true_label.clone().expect("true label set");
        let top = &r.ranked[0];
        if truth.is_unknown() {
            unknown.scored += 1;
            unknown.ranked_first += usize::from(top.label.is_unknown());
        }
        let rank = r.rank_of(&truth);
        attributes.push(AttributeOutcome {
            source: r.source.clone(),
            attribute: r.attribute.clone(),
            true_label: truth,
            predicted: top.label.clone(),
            probability: top.probability,
            rank,
            reciprocal_rank: rank.map_or(0.0, |k| 1.0 / k as f64),
        });
    }
    let fold_mrr = if rankings.is_empty() {
        0.0
    } else {
        mrr(&rankings)?
    };
    Ok(FoldOutcome::Done(
        FoldResult {
            fold,
            train_sources,
            test_sources: test_sources.iter().map(|s| s.to_string()).collect(),
            train_instances: trained.instances,
            labels: trained.model.label_order.len(),
            mrr: fold_mrr,
            attributes,
            train_seconds: Some(train_seconds),
            predict_seconds: Some(predict_seconds),
        },
        unknown,
    ))
}

fn corpus_summary(corpus: &LabeledCorpus) -> CorpusSummary {
    CorpusSummary {
        sources: corpus.sources.len(),
        attributes: corpus.num_attributes(),
        unknown_attributes: corpus.labels.values().filter(|l| l.is_unknown()).count(),
        labels: corpus
            .known_labels()
            .iter()
            .map(SemanticLabel::id)
            .collect(),
    }
}

fn assemble_report(
    corpus: &LabeledCorpus,
    protocol: Protocol,
    cfg: &PipelineConfig,
    outcomes: Vec<(usize, Vec<String>, FoldOutcome)>,
) -> Result<EvaluationReport> {
    let mut folds = Vec::new();
    let mut skipped = Vec::new();
    let mut unknown = UnknownSummary::default();
    for (fold, train_sources, outcome) in outcomes {
        match outcome {
            FoldOutcome::Done(result, u) => {
                unknown.scored += u.scored;
                unknown.ranked_first += u.ranked_first;
                folds.push(result);
            }
            FoldOutcome::Degenerate(reason) => skipped.push(SkippedFold {
                fold,
                train_sources,
                reason,
            }),
        }
    }
    if folds.is_empty() {
        return Err(Error::DegenerateSplit(
            "every fold was skipped for lack of training classes".into(),
        ));
    }
    let mean_mrr = folds.iter().map(|f| f.mrr).sum::<f64>() / folds.len() as f64;
    Ok(EvaluationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        protocol,
        config: cfg.clone(),
        include_unknown: cfg.include_unknown,
        corpus: corpus_summary(corpus),
        folds,
        skipped,
        mean_mrr,
        unknown,
    })
}

/// One fold per source: train on the others, score the held-out source.
pub fn leave_one_out(corpus: &LabeledCorpus, cfg: &PipelineConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let n = corpus.sources.len();
    if n < 2 {
        return Err(Error::TooFewSources(n));
    }
    let outcomes = (0..n)
        .into_par_iter()
        .map(|fold| {
            let test: BTreeSet<&str> = [corpus.sources[fold].name.as_str()].into();
            let outcome = run_fold(corpus, fold, &test, cfg)?;
            if let FoldOutcome::Degenerate(_) = outcome {
                return Err(Error::DegenerateFold {
                    fold,
                    test: corpus.sources[fold].name.clone(),
                });
            }
            Ok((fold, Vec::new(), outcome))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_report(corpus, Protocol::LeaveOneOut, cfg, outcomes)
}

/// Training sources drawn for each holdout iteration, sorted by corpus order.
pub fn holdout_splits(sources: usize, holdout: &HoldoutConfig) -> Result<Vec<Vec<usize>>> {
    holdout.validate()?;
    if sources < 2 {
        return Err(Error::TooFewSources(sources));
    }
    let k = holdout.train_count(sources);
    if k < 1 || k >= sources {
        return Err(Error::DegenerateSplit(format!(
            "p = {} on {sources} sources gives {k} training source(s) and {} test source(s)",
            holdout.p,
            sources.saturating_sub(k)
        )));
    }
    Ok((0..holdout.n)
        .map(|it| {
            let mut rng = stream_rng(holdout.seed, stable_id(&["holdout", &it.to_string()]));
            let mut picked = index::sample(&mut rng, sources, k).into_vec();
            picked.sort_unstable();
            picked
        })
        .collect())
}

/// `n` random source splits with `ceil(p * sources)` training sources each.
/// Iterations whose training split has fewer than two labels are skipped and
/// listed in the report.
pub fn repeated_holdout(
    corpus: &LabeledCorpus,
    holdout: &HoldoutConfig,
    cfg: &PipelineConfig,
) -> Result<EvaluationReport> {
    cfg.validate()?;
    let splits = holdout_splits(corpus.sources.len(), holdout)?;
    let outcomes = splits
        .par_iter()
        .enumerate()
        .map(|(it, train_idx)| {
            let train: BTreeSet<usize> = train_idx.iter().copied().collect();
            let test: BTreeSet<&str> = corpus
                .sources
                .iter()
                .enumerate()
                .filter(|(i, _)| !train.contains(i))
                .map(|(_, s)| s.name.as_str())
                .collect();
            let train_names = train_idx
                .iter()
                .map(|&i| corpus.sources[i].name.clone())
                .collect();
            Ok((it, train_names, run_fold(corpus, it, &test, cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let protocol = Protocol::RepeatedHoldout {
        p: holdout.p,
        n: holdout.n,
        seed: holdout.seed,
    };
    assemble_report(corpus, protocol, cfg, outcomes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub num_bags: Vec<usize>,
    pub bag_size: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub num_bags: usize,
    pub bag_size: usize,
    pub mean_mrr: f64,
}

/// Repeated holdout at every `(num_bags, bag_size)` grid point, in grid order.
pub fn sweep_bagging(
    corpus: &LabeledCorpus,
    grid: &SweepGrid,
    holdout: &HoldoutConfig,
    cfg: &PipelineConfig,
) -> Result<Vec<SweepRow>> {
    if grid.num_bags.is_empty() || grid.bag_size.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::new();
    for &num_bags in &grid.num_bags {
        for &bag_size in &grid.bag_size {
            let point = PipelineConfig {
                bagging: Some(BagConfig::new(num_bags, bag_size, cfg.seed)?),
                ..cfg.clone()
            };
            let report = repeated_holdout(corpus, holdout, &point)?;
            rows.push(SweepRow {
                num_bags,
                bag_size,
                mean_mrr: report.mean_mrr,
            });
        }
    }
    Ok(rows)
}

/// CSV rendering of a sweep with header `num_bags,bag_size,mean_mrr`.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("num_bags,bag_size,mean_mrr\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.num_bags, r.bag_size, r.mean_mrr);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, DataSource, LabelMap, LabelMode};
    use crate::models::{ForestConfig, ModelConfig};

    fn corpus(n_sources: usize) -> LabeledCorpus {
        let mut sources = Vec::new();
        let mut labels = LabelMap::new();
        for s in 0..n_sources {
            let name = format!("src{s}");
            let cols = vec![
                (
                    "id".to_string(),
                    (0..6).map(|i| format!("{}", i * 37 + s)).collect(),
                ),
                (
                    "name".to_string(),
                    (0..6)
                        .map(|i| format!("Name{}x", "ab".repeat(i % 3 + 1)))
                        .collect(),
                ),
                (
                    "misc".to_string(),
                    (0..6).map(|i| format!("#{}!", i)).collect(),
                ),
            ];
            sources.push(DataSource::new(name.clone(), cols).unwrap());
            labels.insert(
                (name.clone(), "id".into()),
                SemanticLabel::known("Thing", "id"),
            );
            labels.insert(
                (name.clone(), "name".into()),
                SemanticLabel::known("Thing", "name"),
            );
            labels.insert((name, "misc".into()), SemanticLabel::Unknown);
        }
        build_corpus(sources, labels, LabelMode::Strict).unwrap()
    }

    fn cfg() -> PipelineConfig {
        PipelineConfig {
            model: ModelConfig::Rf(ForestConfig {
                n_trees: 8,
                ..Default::default()
            }),
            bagging: Some(BagConfig::new(3, 4, 1).unwrap()),
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn loo_has_one_fold_per_source() {
        let c = corpus(4);
        let r = leave_one_out(&c, &cfg()).unwrap();
        assert_eq!(r.folds.len(), 4);
        let mean = r.fold_mrrs().iter().sum::<f64>() / 4.0;
        assert!((mean - r.mean_mrr).abs() < 1e-12);
        assert_eq!(r.unknown.scored, 4);
        for f in &r.folds {
            assert_eq!(f.train_sources.len(), 3);
            assert!(!f.train_sources.contains(&f.test_sources[0]));
            assert_eq!(f.train_instances, 9 * 3);
        }
    }

    #[test]
    fn unknown_toggle_removes_unknown_attributes() {
        let c = corpus(3);
        let off = PipelineConfig {
            include_unknown: false,
            ..cfg()
        };
        let r = leave_one_out(&c, &off).unwrap();
        for f in &r.folds {
            assert_eq!(f.labels, 2);
            assert_eq!(f.attributes.len(), 2);
            assert!(f.attributes.iter().all(|a| !a.true_label.is_unknown()));
            assert_eq!(f.train_instances, 2 * 2 * 3);
        }
        let on = leave_one_out(&c, &cfg()).unwrap();
        assert!(on
            .folds
            .iter()
            .all(|f| f.labels == 3 && f.attributes.len() == 3));
    }

    #[test]
    fn too_few_sources() {
        assert!(matches!(
            leave_one_out(&corpus(1), &cfg()),
            Err(Error::TooFewSources(1))
        ));
    }

    #[test]
    fn degenerate_loo_fold_is_named() {
        let mut sources = Vec::new();
        let mut labels = LabelMap::new();
        for s in ["a", "b"] {
            sources.push(DataSource::new(s, vec![("x".into(), vec!["1".into()])]).unwrap());
            labels.insert((s.into(), "x".into()), SemanticLabel::known("T", "x"));
        }
        let c = build_corpus(sources, labels, LabelMode::Strict).unwrap();
        match leave_one_out(&c, &cfg()) {
            Err(Error::DegenerateFold { fold: 0, test }) => assert_eq!(test, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn holdout_split_sizes() {
        let h = HoldoutConfig {
            p: 0.2,
            n: 10,
            seed: 1,
        };
        let splits = holdout_splits(10, &h).unwrap();
        assert_eq!(splits.len(), 10);
        assert!(splits.iter().all(|s| s.len() == 2));
        let h = HoldoutConfig {
            p: 0.5,
            n: 3,
            seed: 1,
        };
        assert!(holdout_splits(4, &h).unwrap().iter().all(|s| s.len() == 2));
        let h = HoldoutConfig {
            p: 0.99,
            n: 3,
            seed: 1,
        };
        assert!(matches!(
            holdout_splits(4, &h),
            Err(Error::DegenerateSplit(_))
        ));
        assert!(HoldoutConfig {
            p: 1.0,
            n: 3,
            seed: 1
        }
        .validate()
        .is_err());
        assert!(HoldoutConfig {
            p: 0.5,
            n: 0,
            seed: 1
        }
        .validate()
        .is_err());
    }

    #[test]
    fn holdout_is_deterministic() {
        let c = corpus(5);
        let h = HoldoutConfig {
            p: 0.4,
            n: 3,
            seed: 9,
        };
        let a = repeated_holdout(&c, &h, &cfg()).unwrap();
        let b = repeated_holdout(&c, &h, &cfg()).unwrap();
        assert_eq!(a.to_json(false), b.to_json(false));
        assert_eq!(a.folds.len() + a.skipped.len(), 3);
        assert!(a
            .folds
            .iter()
            .all(|f| f.train_sources.len() == 2 && f.test_sources.len() == 3));
    }

    #[test]
    fn report_round_trip_and_markdown() {
        let c = corpus(3);
        let r = leave_one_out(&c, &cfg()).unwrap();
        let back = EvaluationReport::from_json(&r.to_json(true)).unwrap();
        assert_eq!(back, r);
        assert_eq!(
            EvaluationReport::from_json(&r.to_json(false)).unwrap(),
            r.without_timing()
        );
        let md = r.to_markdown();
        let rows = md
            .lines()
            .filter(|l| l.starts_with("| ") && !l.starts_with("| fold"))
            .count();
        assert_eq!(rows, 3 + 1);
    }

    #[test]
    fn mean_mrr_in_json() {
        let mut r = leave_one_out(&corpus(2), &cfg()).unwrap();
        r.mean_mrr = 0.5833;
        assert!(r.to_json(false).contains("\"mean_mrr\": 0.5833"));
    }

    #[test]
    fn sweep_rows_follow_grid() {
        let c = corpus(4);
        let h = HoldoutConfig {
            p: 0.5,
            n: 2,
            seed: 1,
        };
        let grid = SweepGrid {
            num_bags: vec![1, 2],
            bag_size: vec![3],
        };
        let rows = sweep_bagging(&c, &grid, &h, &cfg()).unwrap();
        assert_eq!(rows.len(), 2);
        let csv = sweep_to_csv(&rows);
        assert!(csv.starts_with("num_bags,bag_size,mean_mrr\n1,3,"));
        let empty = SweepGrid {
            num_bags: vec![],
            bag_size: vec![3],
        };
        assert!(matches!(
            sweep_bagging(&c, &empty, &h, &cfg()),
            Err(Error::EmptyGrid)
        ));
    }
}
