//! Evaluation reports and their JSON / markdown renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pipeline::PipelineConfig;
use crate::corpus::SemanticLabel;
use crate::error::{Error, Result};
use crate::sampling::RebalanceStrategy;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    LeaveOneOut,
    RepeatedHoldout { p: f64, n: usize, seed: u64 },
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::LeaveOneOut => "leave_one_out",
            Protocol::RepeatedHoldout { .. } => "repeated_holdout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub sources: usize,
    pub attributes: usize,
    pub unknown_attributes: usize,
    /// Known label ids of the whole corpus.
    pub labels: Vec<String>,
}

/// Outcome for one scored test attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeOutcome {
    pub source: String,
    pub attribute: String,
    pub true_label: SemanticLabel,
    pub predicted: SemanticLabel,
    pub probability: f64,
    /// 1-based rank of the true label; absent when the model never saw it.
    pub rank: Option<usize>,
    pub reciprocal_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_sources: Vec<String>,
    pub test_sources: Vec<String>,
    pub train_instances: usize,
    pub labels: usize,
    pub mrr: f64,
    pub attributes: Vec<AttributeOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_seconds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predict_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedFold {
    pub fold: usize,
    pub train_sources: Vec<String>,
    pub reason: String,
}

/// How often unknown-labeled test attributes were ranked unknown first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UnknownSummary {
    pub scored: usize,
    pub ranked_first: usize,
}

impl UnknownSummary {
    pub fn ratio(&self) -> Option<f64> {
        (self.scored > 0).then(|| self.ranked_first as f64 / self.scored as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub protocol: Protocol,
    pub config: PipelineConfig,
    pub include_unknown: bool,
    pub corpus: CorpusSummary,
    pub folds: Vec<FoldResult>,
    pub skipped: Vec<SkippedFold>,
    pub mean_mrr: f64,
    pub unknown: UnknownSummary,
}

impl EvaluationReport {
    pub fn fold_mrrs(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.mrr).collect()
    }

    pub fn total_train_seconds(&self) -> Option<f64> {
        self.folds.iter().map(|f| f.train_seconds).sum()
    }

    pub fn total_predict_seconds(&self) -> Option<f64> {
        self.folds.iter().map(|f| f.predict_seconds).sum()
    }

    /// Copy without wall-clock measurements.
    pub fn without_timing(&self) -> EvaluationReport {
        let mut r = self.clone();
        for f in &mut r.folds {
            f.train_seconds = None;
            f.predict_seconds = None;
        }
        r
    }

    /// Pretty JSON; timings are embedded only when `with_timing` is set so
    /// that default output is reproducible byte for byte.
    pub fn to_json(&self, with_timing: bool) -> String {
        let r = if with_timing {
            self.clone()
        } else {
            self.without_timing()
        };
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: EvaluationReport =
            serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
        if r.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::Report(format!(
                "report schema version {} (expected {REPORT_SCHEMA_VERSION})",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn to_markdown(&self) -> String {
        let cfg = &self.config;
        let model = cfg.model.kind().to_string();
        let sampling = sampling_label(cfg);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} ({}, features: {}, unknown {})\n",
            self.protocol.name(),
            model,
            cfg.feature_set,
            if self.include_unknown {
                "included"
            } else {
                "excluded"
            }
        );
        out.push_str("| fold | test sources | model | sampling | MRR | train s | predict s |\n");
        out.push_str("|---:|---|---|---|---:|---:|---:|\n");
        for f in &self.folds {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {:.3} | {} | {} |",
                f.fold,
                f.test_sources.join(", "),
                model,
                sampling,
                f.mrr,
                seconds(f.train_seconds),
                seconds(f.predict_seconds),
            );
        }
        let _ = writeln!(
            out,
            "| mean | | {} | {} | {:.3} | {} | {} |",
            model,
            sampling,
            self.mean_mrr,
            seconds(self.total_train_seconds()),
            seconds(self.total_predict_seconds()),
        );
        if let Some(ratio) = self.unknown.ratio() {
            let _ = writeln!(
                out,
                "\nunknown ranked first: {}/{} ({:.1}%)",
                self.unknown.ranked_first,
                self.unknown.scored,
                ratio * 100.0
            );
        }
        for s in &self.skipped {
            let _ = writeln!(out, "\nskipped fold {}: {}", s.fold, s.reason);
        }
        out
    }
}

fn sampling_label(cfg: &PipelineConfig) -> String {
    let mut parts = Vec::new();
    match &cfg.bagging {
        Some(b) => {
            let phase = if cfg.predict_bagging {
                "train+predict"
            } else {
                "train"
            };
            parts.push(format!("bagging {}x{} ({phase})", b.num_bags, b.bag_size));
        }
        None => parts.push("no bagging".to_string()),
    }
    if cfg.rebalance != RebalanceStrategy::None {
        parts.push(format!("resample to {}", cfg.rebalance));
    }
    parts.join(", ")
}

fn seconds(s: Option<f64>) -> String {
    s.map_or_else(|| "-".to_string(), |s| format!("{s:.2}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!(
                "unknown report format {other:?} (expected json or markdown)"
            ))),
        }
    }
}

/// Writes the report to `path`.
pub fn emit_report(
    report: &EvaluationReport,
    path: &Path,
    format: ReportFormat,
    with_timing: bool,
) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json(with_timing),
        ReportFormat::Markdown => report.to_markdown(),
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<EvaluationReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EvaluationReport::from_json(&text)
}
