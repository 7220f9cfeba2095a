//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use semlabel::corpus::{
    generate_synthetic, load_corpus, load_source, save_corpus, LabelMode, LabeledCorpus,
    LoadOptions, SynthSpec,
};
use semlabel::evaluate::{
    emit_report, leave_one_out, predict_attribute, repeated_holdout, sweep_bagging, sweep_to_csv,
    train_pipeline, EvaluationReport, HoldoutConfig, PredictionRanking, ReportFormat, SweepGrid,
};
use semlabel::featurize::FeatureSchema;
use semlabel::models::{load_model, model_to_json, save_model, TrainedModel, FORMAT_VERSION};
use semlabel::sampling::BagConfig;
use semlabel::{Error, FeatureSet, SemanticLabel};

use crate::args::{
    BenchmarkArgs, InspectArgs, PredictArgs, SchemaArgs, SweepArgs, SynthArgs, TrainArgs,
};
use crate::config::{delimiter_byte, resolve, Resolved};
use crate::CliError;

type Out<'a> = &'a mut dyn Write;

fn emit_json(out: Out, value: &Value) -> Result<(), CliError> {
    writeln!(out, "{value}").map_err(|e| CliError::Core(Error::io(Path::new("<stdout>"), e)))
}

fn write_text(out: Out, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Core(Error::io(Path::new("<stdout>"), e)))
}

fn require_file(path: &Path, what: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{what} {} not found",
            path.display()
        )))
    }
}

fn require_output_dir(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Usage(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

/// Checks corpus and label paths, then loads the corpus.
fn open_corpus(r: &Resolved) -> Result<LabeledCorpus, CliError> {
    let dir = r
        .corpus
        .as_ref()
        .ok_or_else(|| CliError::Usage("--corpus is required".into()))?;
    if !dir.is_dir() {
        return Err(CliError::Usage(format!(
            "corpus directory {} not found",
            dir.display()
        )));
    }
    let labels = r
        .labels
        .clone()
        .unwrap_or_else(|| dir.join(semlabel::corpus::LABELS_FILE));
    if !labels.is_file() {
        return Err(CliError::Usage(format!(
            "labels.json not found: {}",
            labels.display()
        )));
    }
    let options = LoadOptions {
        delimiter: r.delimiter,
        ..Default::default()
    };
    let mode = if r.lenient {
        LabelMode::Lenient
    } else {
        LabelMode::Strict
    };
    let (corpus, _) = load_corpus(dir, Some(&labels), options, mode)?;
    Ok(corpus)
}

pub fn train(args: TrainArgs, out: Out) -> Result<(), CliError> {
    let r = resolve(&args.pipeline, None, args.output.as_ref())?;
    let output = r
        .output
        .clone()
        .ok_or_else(|| CliError::Usage("--output is required".into()))?;
    require_output_dir(&output)?;
    let corpus = open_corpus(&r)?;
    let attrs: Vec<_> = corpus.labeled_attributes().collect();
    let trained = train_pipeline(&attrs, &r.pipeline, 0)?;
    save_model(&trained.model, &output)?;

    let model = &trained.model;
    let class_counts: BTreeMap<String, usize> = model
        .label_order
        .iter()
        .map(SemanticLabel::id)
        .zip(model.meta.class_counts.iter().copied())
        .collect();
    emit_json(
        out,
        &json!({
            "model": model.kind().to_string(),
            "feature_set": model.schema.set.as_str(),
            "features": model.schema.len(),
            "labels": model.label_order.len(),
            "attributes": attrs.iter().filter(|(_, l)| r.pipeline.include_unknown || !l.is_unknown()).count(),
            "instances": trained.instances,
            "class_counts": class_counts,
            "train_seconds": model.train_seconds,
            "output": output.display().to_string(),
        }),
    )
}

fn ranking_json(r: &PredictionRanking) -> Value {
    json!({
        "source": r.source,
        "attribute": r.attribute,
        "ranking": r.ranked.iter().map(|x| json!({
            "label": x.label.id(),
            "probability": x.probability,
        })).collect::<Vec<_>>(),
    })
}

pub fn predict(args: PredictArgs, out: Out) -> Result<(), CliError> {
    require_file(&args.model_file, "model file")?;
    require_file(&args.input, "input file")?;
    if args.top == Some(0) {
        return Err(CliError::Usage("--top must be at least 1".into()));
    }
    let requested: Option<FeatureSet> = args
        .features
        .as_deref()
        .map(str::parse)
        .transpose()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let bagging = if args.predict_bags {
        Some(
            BagConfig::new(args.num_bags, args.bag_size, args.seed)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        )
    } else {
        None
    };
    let options = LoadOptions {
        delimiter: delimiter_byte(args.delimiter)?,
        has_header: !args.no_header,
    };

    let model = load_model(&args.model_file)?;
    if let Some(set) = requested {
        if set != model.schema.set {
            return Err(Error::SchemaMismatch(format!(
                "requested feature set {set} but the model was trained on {}",
                model.schema.set
            ))
            .into());
        }
    }
    let featurizer = model
        .featurizer
        .as_ref()
        .ok_or_else(|| Error::SchemaMismatch("model file carries no featurizer".into()))?;
    let source = load_source(&args.input, options)?.source;
    for attr in &source.attributes {
        let mut ranking = predict_attribute(&model, attr, featurizer, bagging.as_ref())?;
        if let Some(top) = args.top {
            ranking.truncate(top);
        }
        if args.pretty {
            let labels: Vec<String> = ranking
                .ranked
                .iter()
                .map(|x| format!("{} {:.3}", x.label.id(), x.probability))
                .collect();
            write_text(
                out,
                &format!("{}: {}\n", ranking.attribute, labels.join(", ")),
            )?;
        } else {
            emit_json(out, &ranking_json(&ranking))?;
        }
    }
    Ok(())
}

fn holdout_config(r: &Resolved) -> Result<HoldoutConfig, CliError> {
    let p =
        r.p.ok_or_else(|| CliError::Usage("holdout requires --p".into()))?;
    let n =
        r.n.ok_or_else(|| CliError::Usage("holdout requires --n".into()))?;
    let cfg = HoldoutConfig {
        p,
        n,
        seed: r.pipeline.seed,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn report_format(path: &Path, flag: Option<&str>) -> Result<ReportFormat, CliError> {
    match flag {
        Some(f) => f.parse().map_err(|e: Error| CliError::Usage(e.to_string())),
        None => Ok(match path.extension().and_then(|e| e.to_str()) {
            Some("md" | "markdown") => ReportFormat::Markdown,
            _ => ReportFormat::Json,
        }),
    }
}

pub fn benchmark(args: BenchmarkArgs, out: Out) -> Result<(), CliError> {
    let r = resolve(&args.pipeline, Some(&args.holdout), args.output.as_ref())?;
    let protocol = args
        .protocol
        .clone()
        .or(r.protocol.clone())
        .ok_or_else(|| CliError::Usage("--protocol is required (loo or holdout)".into()))?;
    if !r.seed_given {
        return Err(CliError::Usage("--seed is required for benchmark".into()));
    }
    let holdout = match protocol.as_str() {
        "loo" => {
            if r.p.is_some() {
                return Err(CliError::Usage("p is only valid for holdout".into()));
            }
            if r.n.is_some() {
                return Err(CliError::Usage("n is only valid for holdout".into()));
            }
            None
        }
        "holdout" => Some(holdout_config(&r)?),
        other => {
            return Err(CliError::Usage(format!(
                "unknown protocol {other:?} (expected loo or holdout)"
            )))
        }
    };
    let output = r
        .output
        .clone()
        .ok_or_else(|| CliError::Usage("--output is required".into()))?;
    require_output_dir(&output)?;
    let format = report_format(&output, args.format.as_deref())?;
    if let Some(md) = &args.markdown {
        require_output_dir(md)?;
    }
    let corpus = open_corpus(&r)?;

    let report: EvaluationReport = match &holdout {
        None => leave_one_out(&corpus, &r.pipeline)?,
        Some(h) => repeated_holdout(&corpus, h, &r.pipeline)?,
    };
    emit_report(&report, &output, format, args.with_timing)?;
    if let Some(md) = &args.markdown {
        emit_report(&report, md, ReportFormat::Markdown, args.with_timing)?;
    }
    emit_json(
        out,
        &json!({
            "protocol": report.protocol.name(),
            "mean_mrr": report.mean_mrr,
            "folds": report.folds.len(),
            "skipped": report.skipped.len(),
            "unknown_scored": report.unknown.scored,
            "unknown_ranked_first": report.unknown.ranked_first,
            "report": output.display().to_string(),
        }),
    )
}

pub fn sweep(args: SweepArgs, out: Out) -> Result<(), CliError> {
    let r = resolve(&args.pipeline, Some(&args.holdout), args.output.as_ref())?;
    if !r.seed_given {
        return Err(CliError::Usage("--seed is required for sweep".into()));
    }
    let holdout = holdout_config(&r)?;
    if let Some(o) = &r.output {
        require_output_dir(o)?;
    }
    let corpus = open_corpus(&r)?;
    let grid = SweepGrid {
        num_bags: args.num_bags_grid,
        bag_size: args.bag_size_grid,
    };
    let rows = sweep_bagging(&corpus, &grid, &holdout, &r.pipeline)?;
    let csv = sweep_to_csv(&rows);
    match &r.output {
        Some(path) => fs::write(path, &csv).map_err(|e| CliError::Core(Error::io(path, e))),
        None => write_text(out, &csv),
    }
}

pub fn synth(args: SynthArgs, out: Out) -> Result<(), CliError> {
    let spec = match &args.spec {
        Some(path) => {
            require_file(path, "synthesis spec")?;
            parse_synth_spec(&fs::read(path).map_err(|e| CliError::Core(Error::io(path, e)))?)?
        }
        None => SynthSpec::standard(
            args.sources,
            args.labels,
            args.unknown_frac,
            (args.min_rows, args.max_rows),
        )?,
    };
    let corpus = generate_synthetic(&spec, args.seed)?;
    write_corpus(&corpus, &args.output)?;
    emit_json(
        out,
        &json!({
            "sources": corpus.sources.len(),
            "attributes": corpus.num_attributes(),
            "labels": corpus.known_labels().len(),
            "unknown_attributes": corpus.labels.values().filter(|l| l.is_unknown()).count(),
            "output": args.output.display().to_string(),
        }),
    )
}

/// Parses a JSON synthesis spec.
pub fn parse_synth_spec(bytes: &[u8]) -> Result<SynthSpec, CliError> {
    serde_json::from_slice(bytes)
        .map_err(|e| CliError::Usage(format!("invalid synthesis spec: {e}")))
}

fn write_corpus(corpus: &LabeledCorpus, dir: &PathBuf) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Core(Error::io(dir, e)))?;
    save_corpus(corpus, dir)?;
    Ok(())
}

pub fn schema(args: SchemaArgs, out: Out) -> Result<(), CliError> {
    let (set, labels) = if let Some(path) = &args.model_file {
        require_file(path, "model file")?;
        let model = load_model(path)?;
        if let Some(f) = &args.features {
            let set: FeatureSet = f
                .parse()
                .map_err(|e: Error| CliError::Usage(e.to_string()))?;
            if set != model.schema.set {
                return Err(Error::SchemaMismatch(format!(
                    "requested feature set {set} but the model was trained on {}",
                    model.schema.set
                ))
                .into());
            }
        }
        return emit_schema(out, &model.schema);
    } else {
        let set: FeatureSet = args
            .features
            .as_deref()
            .ok_or_else(|| CliError::Usage("--features is required".into()))?
            .parse()
            .map_err(|e: Error| CliError::Usage(e.to_string()))?;
        let mut labels: Vec<SemanticLabel> = if let Some(dir) = &args.corpus {
            let r = Resolved {
                corpus: Some(dir.clone()),
                labels: None,
                pipeline: Default::default(),
                seed_given: false,
                lenient: false,
                delimiter: b',',
                protocol: None,
                p: None,
                n: None,
                output: None,
            };
            let corpus = open_corpus(&r)?;
            let mut ls = corpus.known_labels();
            if args.include_unknown && corpus.labels.values().any(SemanticLabel::is_unknown) {
                ls.push(SemanticLabel::Unknown);
            }
            ls
        } else {
            args.label
                .iter()
                .map(|id| parse_label_id(id))
                .collect::<Result<_, _>>()?
        };
        labels.sort();
        labels.dedup();
        if set.needs_index() && labels.is_empty() {
            return Err(CliError::Usage(format!(
                "feature set {set} needs labels (--label, --corpus or --model-file)"
            )));
        }
        (set, labels)
    };
    let labels = if set.needs_index() {
        labels
    } else {
        Vec::new()
    };
    emit_schema(out, &FeatureSchema::new(set, &labels))
}

fn emit_schema(out: Out, schema: &FeatureSchema) -> Result<(), CliError> {
    emit_json(
        out,
        &json!({
            "feature_set": schema.set.as_str(),
            "width": schema.len(),
            "names": schema.names,
        }),
    )
}

fn parse_label_id(id: &str) -> Result<SemanticLabel, CliError> {
    if id == semlabel::corpus::UNKNOWN {
        return Ok(SemanticLabel::Unknown);
    }
    let (class, property) = id.split_once('.').ok_or_else(|| {
        CliError::Usage(format!("label {id:?} is not of the form Class.property"))
    })?;
    SemanticLabel::from_parts(class, Some(property)).map_err(CliError::Usage)
}

pub fn inspect(args: InspectArgs, out: Out) -> Result<(), CliError> {
    require_file(&args.model_file, "model file")?;
    let model = load_model(&args.model_file)?;
    if args.dump_json {
        return write_text(out, &(model_to_json(&model) + "\n"));
    }
    emit_json(out, &model_summary(&model))
}

fn model_summary(model: &TrainedModel) -> Value {
    let class_counts: BTreeMap<String, usize> = model
        .label_order
        .iter()
        .map(SemanticLabel::id)
        .zip(model.meta.class_counts.iter().copied())
        .collect();
    json!({
        "format_version": FORMAT_VERSION,
        "kind": model.kind().to_string(),
        "feature_set": model.schema.set.as_str(),
        "width": model.schema.len(),
        "labels": model.label_order.iter().map(SemanticLabel::id).collect::<Vec<_>>(),
        "instances": model.meta.instances,
        "class_counts": class_counts,
        "config": model.meta.config,
        "has_featurizer": model.featurizer.is_some(),
    })
}
