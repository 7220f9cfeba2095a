//! The 26 column statistics.
//!
//! Values are summarized once per column ([`ColumnSummary`]); any subset of
//! rows (the whole column, or a bag drawn with replacement) is then
//! aggregated from the per-value summaries.

use std::collections::HashMap;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::chars::{vocab_index, CharProfile, VOCAB_SIZE};

pub const STAT_COUNT: usize = 26;

pub const STAT_NAMES: [&str; STAT_COUNT] = [
    "row_count",
    "unique_ratio",
    "empty_ratio",
    "len_min",
    "len_max",
    "len_mean",
    "len_median",
    "len_std",
    "whitespace_total",
    "whitespace_mean",
    "alpha_ratio",
    "digit_ratio",
    "punct_ratio",
    "upper_ratio",
    "numeric_ratio",
    "date_ratio",
    "num_mean",
    "num_min",
    "num_max",
    "num_std",
    "negative_ratio",
    "integer_ratio",
    "value_entropy",
    "tokens_mean",
    "len1_ratio",
    "all_caps_ratio",
];

/// Column statistics; ratio fields are in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatFeatures {
    pub row_count: f64,
    pub unique_ratio: f64,
    pub empty_ratio: f64,
    pub len_min: f64,
    pub len_max: f64,
    pub len_mean: f64,
    pub len_median: f64,
    pub len_std: f64,
    pub whitespace_total: f64,
    pub whitespace_mean: f64,
    pub alpha_ratio: f64,
    pub digit_ratio: f64,
    pub punct_ratio: f64,
    pub upper_ratio: f64,
    pub numeric_ratio: f64,
    pub date_ratio: f64,
    pub num_mean: f64,
    pub num_min: f64,
    pub num_max: f64,
    pub num_std: f64,
    pub negative_ratio: f64,
    pub integer_ratio: f64,
    pub value_entropy: f64,
    pub tokens_mean: f64,
    pub len1_ratio: f64,
    pub all_caps_ratio: f64,
}

impl StatFeatures {
    /// Values in [`STAT_NAMES`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.row_count,
            self.unique_ratio,
            self.empty_ratio,
            self.len_min,
            self.len_max,
            self.len_mean,
            self.len_median,
            self.len_std,
            self.whitespace_total,
            self.whitespace_mean,
            self.alpha_ratio,
            self.digit_ratio,
            self.punct_ratio,
            self.upper_ratio,
            self.numeric_ratio,
            self.date_ratio,
            self.num_mean,
            self.num_min,
            self.num_max,
            self.num_std,
            self.negative_ratio,
            self.integer_ratio,
            self.value_entropy,
            self.tokens_mean,
            self.len1_ratio,
            self.all_caps_ratio,
        ]
    }
}

/// Parses a decimal number: optional sign, digits with optional `,`
/// thousands separators, optional fractional part. Surrounding whitespace is
/// ignored.
pub fn parse_number(value: &str) -> Option<f64> {
    let trimmed = value.trim();
    let unsigned = trimmed.strip_prefix(['+', '-']).unwrap_or(trimmed);
    let mut digits = 0;
    let mut dots = 0;
    for c in unsigned.chars() {
        match c {
            '0'..='9' => digits += 1,
            '.' => dots += 1,
            ',' => {}
            _ => return None,
        }
    }
    if digits == 0 || dots > 1 {
        return None;
    }
    let cleaned: String = trimmed.chars().filter(|&c| c != ',').collect();
    cleaned.parse::<f64>().ok().filter(|x| x.is_finite())
}

const DATE_FORMATS: &[&str] = &[
    "%Y-%m-%d",
    "%d-%m-%Y",
    "%m-%d-%Y",
    "%Y/%m/%d",
    "%m/%d/%Y",
    "%d/%m/%Y",
    "%d.%m.%Y",
    "%B %d, %Y",
    "%b %d, %Y",
    "%d %B %Y",
    "%d %b %Y",
];

const DATETIME_FORMATS: &[&str] = &["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S"];

/// True when the value matches one of the fixed date patterns.
pub fn looks_like_date(value: &str) -> bool {
    let v = value.trim();
    if !(6..=32).contains(&v.len()) || !v.bytes().any(|b| b.is_ascii_digit()) {
        return false;
    }
    DATE_FORMATS
        .iter()
        .any(|f| NaiveDate::parse_from_str(v, f).is_ok())
        || DATETIME_FORMATS
            .iter()
            .any(|f| NaiveDateTime::parse_from_str(v, f).is_ok())
}

#[derive(Debug, Clone)]
struct ValueSummary {
    id: usize,
    len: usize,
    whitespace: usize,
    alpha: usize,
    digit: usize,
    punct: usize,
    upper: usize,
    tokens: usize,
    empty: bool,
    all_caps: bool,
    date: bool,
    number: Option<f64>,
    char_counts: Vec<(u8, u32)>,
    skipped: usize,
}

impl ValueSummary {
    fn new(id: usize, value: &str) -> Self {
        let mut s = ValueSummary {
            id,
            len: 0,
            whitespace: 0,
            alpha: 0,
            digit: 0,
            punct: 0,
            upper: 0,
            tokens: value.split_whitespace().count(),
            empty: value.trim().is_empty(),
            all_caps: !value.is_empty() && value.bytes().all(|b| b.is_ascii_uppercase()),
            date: looks_like_date(value),
            number: parse_number(value),
            char_counts: Vec::new(),
            skipped: 0,
        };
        let mut counts = [0u32; VOCAB_SIZE];
        for c in value.chars() {
            s.len += 1;
            if c.is_whitespace() {
                s.whitespace += 1;
            } else if c.is_alphabetic() {
                s.alpha += 1;
            } else if c.is_numeric() {
                s.digit += 1;
            } else if !c.is_control() {
                s.punct += 1;
            }
            if c.is_uppercase() {
                s.upper += 1;
            }
            match vocab_index(c) {
                Some(i) => counts[i] += 1,
                None => s.skipped += 1,
            }
        }
        s.char_counts = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u8, c))
            .collect();
        s
    }
}

/// Per-value summaries of one column; distinct values are summarized once.
#[derive(Debug, Clone)]
pub struct ColumnSummary {
    distinct: Vec<ValueSummary>,
    rows: Vec<usize>,
}

impl ColumnSummary {
    pub fn new<S: AsRef<str>>(values: &[S]) -> Self {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut distinct = Vec::new();
        let mut rows = Vec::with_capacity(values.len());
        for value in values {
            let value = value.as_ref();
            let next = ids.len();
            let id = *ids.entry(value).or_insert_with(|| {
                distinct.push(ValueSummary::new(next, value));
                next
            });
            rows.push(id);
        }
        ColumnSummary { distinct, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn value(&self, row: usize) -> &ValueSummary {
        &self.distinct[self.rows[row]]
    }

    /// Character profile of the given rows (repeats count repeatedly).
    pub fn char_profile(&self, rows: &[usize]) -> CharProfile {
        let mut counts = [0usize; VOCAB_SIZE];
        let mut skipped = 0;
        for &row in rows {
            let v = self.value(row);
            for &(i, c) in &v.char_counts {
                counts[i as usize] += c as usize;
            }
            skipped += v.skipped;
        }
        CharProfile::from_counts(&counts, skipped)
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// Statistics over the given rows; `rows` must be non-empty.
    pub fn stat_features(&self, rows: &[usize]) -> StatFeatures {
        assert!(!rows.is_empty(), "statistics need at least one row");
        let n = rows.len() as f64;
        let values: Vec<&ValueSummary> = rows.iter().map(|&r| self.value(r)).collect();

        let mut lengths: Vec<usize> = values.iter().map(|v| v.len).collect();
        lengths.sort_unstable();
        let len_mean = lengths.iter().sum::<usize>() as f64 / n;
        let len_median = if lengths.len() % 2 == 1 {
            lengths[lengths.len() / 2] as f64
        } else {
            let mid = lengths.len() / 2;
            (lengths[mid - 1] + lengths[mid]) as f64 / 2.0
        };

        let total_chars: usize = lengths.iter().sum();
        let char_ratio = |count: usize| {
            if total_chars == 0 {
                0.0
            } else {
                count as f64 / total_chars as f64
            }
        };
        let sum = |f: fn(&ValueSummary) -> usize| values.iter().map(|v| f(v)).sum::<usize>();
        let frac = |f: fn(&ValueSummary) -> bool| values.iter().filter(|v| f(v)).count() as f64 / n;

        let mut id_counts: HashMap<usize, usize> = HashMap::new();
        for v in &values {
            *id_counts.entry(v.id).or_default() += 1;
        }
        let mut counts: Vec<usize> = id_counts.values().copied().collect();
        counts.sort_unstable();
        let value_entropy = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum::<f64>()
            .max(0.0);

        let numbers: Vec<f64> = values.iter().filter_map(|v| v.number).collect();
        let (num_mean, num_min, num_max, num_std, negative_ratio, integer_ratio) =
            if numbers.is_empty() {
                (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
            } else {
                let m = numbers.len() as f64;
                let mean = numbers.iter().sum::<f64>() / m;
                let min = numbers.iter().copied().fold(f64::INFINITY, f64::min);
                let max = numbers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let std = population_std(&numbers, mean);
                let negative = numbers.iter().filter(|&&x| x < 0.0).count() as f64 / m;
                let integer = numbers.iter().filter(|&&x| x.fract() == 0.0).count() as f64 / m;
                (mean, min, max, std, negative, integer)
            };

        let whitespace_total = sum(|v| v.whitespace) as f64;
        let lengths_f: Vec<f64> = lengths.iter().map(|&l| l as f64).collect();
        StatFeatures {
            row_count: n,
            unique_ratio: id_counts.len() as f64 / n,
            empty_ratio: frac(|v| v.empty),
            len_min: lengths[0] as f64,
            len_max: lengths[lengths.len() - 1] as f64,
            len_mean,
            len_median,
            len_std: population_std(&lengths_f, len_mean),
            whitespace_total,
            whitespace_mean: whitespace_total / n,
            alpha_ratio: char_ratio(sum(|v| v.alpha)),
            digit_ratio: char_ratio(sum(|v| v.digit)),
            punct_ratio: char_ratio(sum(|v| v.punct)),
            upper_ratio: char_ratio(sum(|v| v.upper)),
            numeric_ratio: numbers.len() as f64 / n,
            date_ratio: frac(|v| v.date),
            num_mean,
            num_min,
            num_max,
            num_std,
            negative_ratio,
            integer_ratio,
            value_entropy,
            tokens_mean: sum(|v| v.tokens) as f64 / n,
            len1_ratio: frac(|v| v.len == 1),
            all_caps_ratio: frac(|v| v.all_caps),
        }
    }
}

fn population_std(xs: &[f64], mean: f64) -> f64 {
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    var.sqrt()
}
