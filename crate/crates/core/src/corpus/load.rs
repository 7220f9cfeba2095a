use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_corpus, DataSource, LabelMap, LabelMode, LabeledCorpus, SemanticLabel};
use crate::error::{Error, Result};

pub const LABELS_FILE: &str = "labels.json";
pub const SOURCES_DIR: &str = "sources";
const LABELS_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// When false, columns are named `col_1..col_n`.
    pub has_header: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

/// Irregularities repaired while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadDiagnostics {
    /// Data rows shorter than the table width.
    pub padded_rows: usize,
    /// Empty cells inserted to make the table rectangular.
    pub padded_cells: usize,
    /// Columns that had no header cell because some row was wider than the header.
    pub unnamed_columns: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedSource {
    pub source: DataSource,
    pub diagnostics: LoadDiagnostics,
}

/// Reads one delimiter-separated file; the source is named after the file stem.
pub fn load_source(path: &Path, options: LoadOptions) -> Result<LoadedSource> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_source(&name, &bytes, options)
}

/// Parses delimiter-separated bytes into a rectangular [`DataSource`].
pub fn parse_source(name: &str, bytes: &[u8], options: LoadOptions) -> Result<LoadedSource> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(options.delimiter)
        .from_reader(bytes);

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut record = csv::ByteRecord::new();
    let mut row_index: u64 = 0;
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                return Err(Error::Csv {
                    source_name: name.to_string(),
                    message: e.to_string(),
                })
            }
        }
        row_index += 1;
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let text = std::str::from_utf8(field).map_err(|_| Error::Decode {
                source_name: name.to_string(),
                row: row_index,
                column: col + 1,
            })?;
            row.push(text.to_string());
        }
        rows.push(row);
    }

    let header: Vec<String> = if options.has_header {
        if rows.is_empty() {
            return Err(Error::ZeroDataRows {
                source_name: name.to_string(),
            });
        }
        rows.remove(0)
    } else {
        Vec::new()
    };
    if rows.is_empty() {
        return Err(Error::ZeroDataRows {
            source_name: name.to_string(),
        });
    }

    let width = rows
        .iter()
        .map(Vec::len)
        .chain(std::iter::once(header.len()))
        .max()
        .unwrap_or(0);
    let mut diagnostics = LoadDiagnostics::default();
    let mut names = header;
    if options.has_header {
        diagnostics.unnamed_columns = width - names.len();
    }
    while names.len() < width {
        names.push(format!("col_{}", names.len() + 1));
    }

    let mut columns: Vec<Vec<String>> = vec![Vec::with_capacity(rows.len()); width];
    for row in rows {
        if row.len() < width {
            diagnostics.padded_rows += 1;
            diagnostics.padded_cells += width - row.len();
        }
        let mut cells = row.into_iter();
        for column in columns.iter_mut() {
            column.push(cells.next().unwrap_or_default());
        }
    }

    let source = DataSource::new(name, names.into_iter().zip(columns).collect())?;
    Ok(LoadedSource {
        source,
        diagnostics,
    })
}

#[derive(Debug, Deserialize)]
struct LabelFile {
    version: u32,
    labels: Vec<LabelRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRecord {
    source: String,
    attribute: String,
    class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    property: Option<String>,
}

pub fn load_labels(path: &Path) -> Result<LabelMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&bytes)
}

/// Parses a label document: a JSON array of `{source, attribute, class, property}`
/// records, optionally wrapped as `{"version": 1, "labels": [...]}`.
pub fn parse_labels(bytes: &[u8]) -> Result<LabelMap> {
    let err = |e: serde_json::Error| Error::LabelFile(e.to_string());
    let doc: serde_json::Value = serde_json::from_slice(bytes).map_err(err)?;
    let records: Vec<LabelRecord> = if doc.is_array() {
        serde_json::from_value(doc).map_err(err)?
    } else {
        let file: LabelFile = serde_json::from_value(doc).map_err(err)?;
        if file.version != LABELS_VERSION {
            return Err(Error::LabelFile(format!(
                "unsupported version {} (expected {LABELS_VERSION})",
                file.version
            )));
        }
        file.labels
    };
    let mut map = LabelMap::new();
    for record in records {
        let label = SemanticLabel::from_parts(&record.class, record.property.as_deref()).map_err(
            |msg| Error::LabelFile(format!("({}, {}): {msg}", record.source, record.attribute)),
        )?;
        let key = (record.source, record.attribute);
        if map.contains_key(&key) {
            return Err(Error::DuplicateLabel {
                source_name: key.0,
                attribute: key.1,
            });
        }
        map.insert(key, label);
    }
    Ok(map)
}

pub fn write_labels(labels: &LabelMap) -> String {
    let records: Vec<LabelRecord> = labels
        .iter()
        .map(|((source, attribute), label)| {
            let (class, property) = match label {
                SemanticLabel::Known { class, property } => (class.clone(), Some(property.clone())),
                SemanticLabel::Unknown => (super::UNKNOWN.to_string(), None),
            };
            LabelRecord {
                source: source.clone(),
                attribute: attribute.clone(),
                class,
                property,
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records).expect("label file serializes");
    text.push('\n');
    text
}

fn source_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let sources_dir = dir.join(SOURCES_DIR);
    let entries = fs::read_dir(&sources_dir).map_err(|e| Error::io(&sources_dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&sources_dir, e))?.path();
        if path.extension().is_some_and(|ext| ext == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads `<dir>/sources/*.csv` (sorted by file name) and the given label file.
///
/// Sources are parsed in parallel; the result order is the file-name order.
pub fn load_corpus(
    dir: &Path,
    labels_path: Option<&Path>,
    options: LoadOptions,
    mode: LabelMode,
) -> Result<(LabeledCorpus, BTreeMap<String, LoadDiagnostics>)> {
    let labels_path = labels_path
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join(LABELS_FILE));
    let labels = load_labels(&labels_path)?;
    let files = source_files(dir)?;
    let loaded: Vec<LoadedSource> = files
        .par_iter()
        .map(|path| load_source(path, options))
        .collect::<Result<_>>()?;
    let mut diagnostics = BTreeMap::new();
    let mut sources = Vec::with_capacity(loaded.len());
    for item in loaded {
        diagnostics.insert(item.source.name.clone(), item.diagnostics);
        sources.push(item.source);
    }
    Ok((build_corpus(sources, labels, mode)?, diagnostics))
}

/// Writes a corpus in the directory layout read by [`load_corpus`].
pub fn save_corpus(corpus: &LabeledCorpus, dir: &Path) -> Result<()> {
    let sources_dir = dir.join(SOURCES_DIR);
    fs::create_dir_all(&sources_dir).map_err(|e| Error::io(&sources_dir, e))?;
    for source in &corpus.sources {
        let path = sources_dir.join(format!("{}.csv", source.name));
        let mut writer = csv::WriterBuilder::new()
            .quote_style(csv::QuoteStyle::Necessary)
            .from_writer(Vec::new());
        let write_err = |e: csv::Error| Error::Csv {
            source_name: source.name.clone(),
            message: e.to_string(),
        };
        writer
            .write_record(source.attributes.iter().map(|a| a.name.as_str()))
            .map_err(write_err)?;
        for row in 0..source.num_rows() {
            writer
                .write_record(source.attributes.iter().map(|a| a.values[row].as_str()))
                .map_err(write_err)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Csv {
            source_name: source.name.clone(),
            message: e.to_string(),
        })?;
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    let labels_path = dir.join(LABELS_FILE);
    fs::write(&labels_path, write_labels(&corpus.labels)).map_err(|e| Error::io(&labels_path, e))
}
