#![allow(dead_code, clippy::needless_range_loop)]

use semlabel::corpus::{build_corpus, LabelMap, LabelMode};
use semlabel::{DataSource, LabeledCorpus, SemanticLabel};

fn source(name: &str, cols: &[(&str, [&str; 3])]) -> DataSource {
    DataSource::new(
        name,
        cols.iter()
            .map(|(h, v)| (h.to_string(), v.iter().map(|s| s.to_string()).collect()))
            .collect(),
    )
    .unwrap()
}

pub fn personal_info() -> DataSource {
    source(
        "personal-info",
        &[
            ("name", ["Neil", "Mary", "Henry"]),
            ("birthDate", ["21-05-1916", "07-12-1990", "15-03-2000"]),
            ("city", ["Waterloo", "Eveleigh", "Redfern"]),
            ("state", ["NSW", "NSW", "NSW"]),
            ("workplace", ["CSIRO", "CSIRO", "Data61"]),
        ],
    )
}

pub fn employees() -> DataSource {
    source(
        "Employees",
        &[
            ("employer", ["CSIRO", "Data61", "NICTA"]),
            ("employee", ["Neil", "Mary", "Henry"]),
            ("DOB", ["05/21/1916", "12/07/1990", "03/15/2000"]),
        ],
    )
}

pub fn business_info() -> DataSource {
    source(
        "businessInfo",
        &[
            ("company", ["CSIRO", "Data61", "NICTA"]),
            ("ceo", ["Larry Marshall", "Adrian Turner", "Hugh Durrant"]),
            (
                "state",
                [
                    "Australian Capital Territory",
                    "New South Wales",
                    "New South Wales",
                ],
            ),
            ("founded", ["21-05-1916", "12-07-2016", "15-03-2002"]),
        ],
    )
}

pub fn example_labels() -> LabelMap {
    let k = SemanticLabel::known;
    let rows = [
        ("personal-info", "name", k("Person", "name")),
        ("personal-info", "birthDate", k("Person", "birthDate")),
        ("personal-info", "city", k("City", "name")),
        ("personal-info", "state", k("State", "name")),
        ("personal-info", "workplace", k("Organization", "name")),
        ("Employees", "employer", k("Organization", "name")),
        ("Employees", "employee", k("Person", "name")),
        ("Employees", "DOB", k("Person", "birthDate")),
        ("businessInfo", "company", k("Organization", "name")),
        ("businessInfo", "ceo", k("Person", "name")),
        ("businessInfo", "state", k("State", "name")),
        ("businessInfo", "founded", SemanticLabel::Unknown),
    ];
    rows.into_iter()
        .map(|(s, a, l)| ((s.to_string(), a.to_string()), l))
        .collect()
}

/// The three example sources with their labels.
pub fn example_corpus() -> LabeledCorpus {
    build_corpus(
        vec![personal_info(), employees(), business_info()],
        example_labels(),
        LabelMode::Strict,
    )
    .unwrap()
}

/// Full-matrix edit distance.
pub fn levenshtein_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Full-matrix global alignment score.
pub fn nw_oracle(a: &str, b: &str, m: i64, x: i64, g: i64) -> i64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0i64; b.len() + 1]; a.len() + 1];
    for i in 0..=a.len() {
        d[i][0] = g * i as i64;
    }
    for j in 0..=b.len() {
        d[0][j] = g * j as i64;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let s = if a[i - 1] == b[j - 1] { m } else { x };
            d[i][j] = (d[i - 1][j - 1] + s)
                .max(d[i - 1][j] + g)
                .max(d[i][j - 1] + g);
        }
    }
    d[a.len()][b.len()]
}

pub fn in_vocabulary(c: char) -> bool {
    matches!(c, '\t'..='\r' | ' '..='~')
}

/// Entropy by explicit counting over the in-vocabulary characters.
pub fn entropy_oracle(values: &[String]) -> f64 {
    let mut counts = std::collections::BTreeMap::new();
    let mut total = 0usize;
    for v in values {
        for c in v.chars().filter(|&c| in_vocabulary(c)) {
            *counts.entry(c).or_insert(0usize) += 1;
            total += 1;
        }
    }
    let mut h = 0.0;
    for &n in counts.values() {
        let p = n as f64 / total as f64;
        h -= p * p.log2();
    }
    h
}
