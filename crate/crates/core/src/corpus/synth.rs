//! Deterministic synthetic corpora.
//!
//! Each label owns a value generator with a distinctive character signature
//! (dates, e-mail addresses, acronyms, ...). Unknown columns mix all
//! generators cell by cell plus free text, so their character distribution
//! differs from every pure label.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_corpus, DataSource, LabelMap, LabelMode, LabeledCorpus, SemanticLabel};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    PersonName,
    Date,
    Count,
    Acronym,
    Email,
    Phone,
    Price,
    Url,
    Coordinate,
    CityName,
    Identifier,
    Flag,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 12] = [
        GeneratorKind::PersonName,
        GeneratorKind::Date,
        GeneratorKind::Count,
        GeneratorKind::Acronym,
        GeneratorKind::Email,
        GeneratorKind::Phone,
        GeneratorKind::Price,
        GeneratorKind::Url,
        GeneratorKind::Coordinate,
        GeneratorKind::CityName,
        GeneratorKind::Identifier,
        GeneratorKind::Flag,
    ];

    /// The default `(class, property)` attached to this generator.
    pub fn default_label(self) -> (&'static str, &'static str) {
        match self {
            GeneratorKind::PersonName => ("Person", "name"),
            GeneratorKind::Date => ("Person", "birthDate"),
            GeneratorKind::Count => ("Place", "population"),
            GeneratorKind::Acronym => ("State", "code"),
            GeneratorKind::Email => ("Person", "email"),
            GeneratorKind::Phone => ("Person", "phone"),
            GeneratorKind::Price => ("Product", "price"),
            GeneratorKind::Url => ("Organization", "homepage"),
            GeneratorKind::Coordinate => ("Place", "latitude"),
            GeneratorKind::CityName => ("City", "name"),
            GeneratorKind::Identifier => ("Item", "identifier"),
            GeneratorKind::Flag => ("Item", "active"),
        }
    }

    fn headers(self) -> &'static [&'static str] {
        match self {
            GeneratorKind::PersonName => &["name", "employee", "full_name", "person", "ceo"],
            GeneratorKind::Date => &["birthDate", "dob", "born", "date_of_birth"],
            GeneratorKind::Count => &["population", "count", "inhabitants", "total"],
            GeneratorKind::Acronym => &["state", "state_code", "abbr", "region"],
            GeneratorKind::Email => &["email", "e-mail", "contact", "mail"],
            GeneratorKind::Phone => &["phone", "telephone", "tel", "mobile"],
            GeneratorKind::Price => &["price", "cost", "amount", "fee"],
            GeneratorKind::Url => &["url", "website", "homepage", "link"],
            GeneratorKind::Coordinate => &["latitude", "lat", "geo_lat"],
            GeneratorKind::CityName => &["city", "town", "suburb", "locality"],
            GeneratorKind::Identifier => &["id", "item_id", "ref", "sku"],
            GeneratorKind::Flag => &["active", "enabled", "is_open", "flag"],
        }
    }

    /// One cell value. `dialect` selects one of [`DIALECTS`] formatting
    /// conventions; sources pick a dialect per column, so one label looks
    /// different across sources.
    pub fn sample(self, rng: &mut ChaCha8Rng, dialect: usize) -> String {
        let d = dialect % DIALECTS;
        match self {
            GeneratorKind::PersonName => {
                let (first, last) = (pick(rng, FIRST_NAMES), pick(rng, LAST_NAMES));
                match d {
                    0 => format!("{first} {last}"),
                    1 => format!("{}, {first}", last.to_uppercase()),
                    _ => format!("{}. {last}", &first[..1]),
                }
            }
            GeneratorKind::Date => {
                let (day, month, year) = (
                    rng.gen_range(1..=28),
                    rng.gen_range(1..=12),
                    rng.gen_range(1900..=2020),
                );
                match d {
                    0 => format!("{day:02}-{month:02}-{year}"),
                    1 => format!("{year}/{month:02}/{day:02}"),
                    _ => format!("{day} {} {year}", MONTHS[month - 1]),
                }
            }
            GeneratorKind::Count => {
                let n = rng.gen_range(0..2_000_000u32);
                match d {
                    0 => n.to_string(),
                    1 => thousands(n),
                    _ => format!("{:.1}k", n as f64 / 1000.0),
                }
            }
            GeneratorKind::Acronym => {
                let len = rng.gen_range(2..=4);
                let letters: Vec<char> = (0..len)
                    .map(|_| rng.gen_range(b'A'..=b'Z') as char)
                    .collect();
                match d {
                    0 => letters.into_iter().collect(),
                    1 => letters.into_iter().map(|c| format!("{c}.")).collect(),
                    _ => letters
                        .into_iter()
                        .map(|c| c.to_ascii_lowercase())
                        .collect(),
                }
            }
            GeneratorKind::Email => {
                let first = pick(rng, FIRST_NAMES).to_lowercase();
                let last = pick(rng, LAST_NAMES).to_lowercase();
                let domain = pick(rng, DOMAINS);
                match d {
                    0 => format!("{first}.{last}@{domain}"),
                    1 => format!("{}{last}@{domain}", &first[..1]),
                    _ => format!("{first}_{last}{}@{domain}", rng.gen_range(1..100)),
                }
            }
            GeneratorKind::Phone => {
                let (area, a, b) = (
                    rng.gen_range(2..=9),
                    rng.gen_range(0..10_000),
                    rng.gen_range(0..10_000),
                );
                match d {
                    0 => format!("({area:02}) {a:04} {b:04}"),
                    1 => format!("+61 {area} {a:04} {b:04}"),
                    _ => format!("0{area}-{a:04}-{b:04}"),
                }
            }
            GeneratorKind::Price => {
                let dollars = rng.gen_range(1..100_000u32);
                let cents = rng.gen_range(0..100);
                match d {
                    0 => format!("${}.{cents:02}", thousands(dollars)),
                    1 => format!("{dollars}.{cents:02} USD"),
                    _ => format!("EUR {dollars}"),
                }
            }
            GeneratorKind::Url => {
                let (domain, path) = (pick(rng, DOMAINS), pick(rng, PATHS));
                match d {
                    0 => format!("http://www.{domain}/{path}"),
                    1 => format!("https://{domain}/{path}"),
                    _ => format!("www.{domain}"),
                }
            }
            GeneratorKind::Coordinate => {
                let v = rng.gen_range(-89.0..89.0f64);
                match d {
                    0 => format!("{v:.4}"),
                    1 => format!("{v:.6}"),
                    _ => format!("{:.3}{}", v.abs(), if v < 0.0 { 'S' } else { 'N' }),
                }
            }
            GeneratorKind::CityName => {
                let city = pick(rng, CITIES);
                match d {
                    0 => city.to_string(),
                    1 => city.to_uppercase(),
                    _ => format!("{city}, AU"),
                }
            }
            GeneratorKind::Identifier => {
                let (a, b) = (
                    rng.gen_range(b'A'..=b'Z') as char,
                    rng.gen_range(b'A'..=b'Z') as char,
                );
                let n = rng.gen_range(0..100_000);
                match d {
                    0 => format!("{a}{b}-{n:05}"),
                    1 => format!("{}{}{n:05}", a.to_ascii_lowercase(), b.to_ascii_lowercase()),
                    _ => format!("{n:05}/{a}{b}"),
                }
            }
            GeneratorKind::Flag => {
                let choices: &[&str] = match d {
                    0 => &["yes", "no"],
                    1 => &["true", "false"],
                    _ => &["Y", "N"],
                };
                pick(rng, choices).to_string()
            }
        }
    }
}

/// Number of formatting conventions per generator.
pub const DIALECTS: usize = 3;

fn thousands(n: u32) -> String {
    if n >= 1_000_000 {
        format!("{},{:03},{:03}", n / 1_000_000, n / 1000 % 1000, n % 1000)
    } else if n >= 1000 {
        format!("{},{:03}", n / 1000, n % 1000)
    } else {
        n.to_string()
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).copied().expect("non-empty word list")
}

const FIRST_NAMES: &[&str] = &[
    "Neil", "Mary", "Henry", "Larry", "Adrian", "Hugh", "Alice", "Bruno", "Chen", "Dana", "Elena",
    "Farid", "Grace", "Ivan", "Jun", "Kara", "Liam", "Mona", "Noah", "Olga",
];
const LAST_NAMES: &[&str] = &[
    "Marshall", "Turner", "Durrant", "Smith", "Nguyen", "Garcia", "Kowalski", "Okafor", "Singh",
    "Tanaka", "Rossi", "Murphy", "Haddad", "Jensen", "Silva",
];
const CITIES: &[&str] = &[
    "Waterloo",
    "Eveleigh",
    "Redfern",
    "Canberra",
    "Melbourne",
    "Hobart",
    "Darwin",
    "Perth",
    "Adelaide",
    "Brisbane",
    "Geelong",
    "Ballarat",
    "Bendigo",
    "Cairns",
    "Townsville",
    "Wollongong",
];
const DOMAINS: &[&str] = &[
    "example.org",
    "csiro.au",
    "data61.com",
    "nicta.com.au",
    "mail.net",
    "uni.edu",
];
const PATHS: &[&str] = &[
    "about",
    "index.html",
    "team",
    "contact-us",
    "news/2016",
    "products",
];
const MONTHS: &[&str] = &[
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];
const UNKNOWN_HEADERS: &[&str] = &["notes", "misc", "extra", "comment", "other", "remarks"];
const FREE_TEXT: &[&str] = &[
    "see attached",
    "n/a",
    "TBD",
    "check later; ok?",
    "-- pending --",
    "#42 [draft]",
    "x*y=z",
];

/// A label of the synthetic corpus and its value generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthLabel {
    pub class: String,
    pub property: String,
    pub generator: GeneratorKind,
    /// Columns of this label per source; encodes class imbalance.
    #[serde(default = "one")]
    pub weight: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_sources: usize,
    pub labels: Vec<SynthLabel>,
    pub min_rows: usize,
    pub max_rows: usize,
    /// Fraction of all columns that are unknown, in `[0, 1)`.
    pub unknown_fraction: f64,
}

impl SynthSpec {
    /// `num_labels` labels from the built-in generator catalogue, one column
    /// each per source.
    pub fn standard(
        num_sources: usize,
        num_labels: usize,
        unknown_fraction: f64,
        rows: (usize, usize),
    ) -> Result<Self> {
        if num_labels > GeneratorKind::ALL.len() {
            return Err(Error::SynthSpec(format!(
                "at most {} built-in labels are available, {num_labels} requested",
                GeneratorKind::ALL.len()
            )));
        }
        let labels = GeneratorKind::ALL[..num_labels]
            .iter()
            .map(|&generator| {
                let (class, property) = generator.default_label();
                SynthLabel {
                    class: class.into(),
                    property: property.into(),
                    generator,
                    weight: 1,
                }
            })
            .collect();
        Ok(SynthSpec {
            num_sources,
            labels,
            min_rows: rows.0,
            max_rows: rows.1,
            unknown_fraction,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.num_sources == 0 {
            return Err(Error::SynthSpec("zero sources".into()));
        }
        if self.labels.is_empty() {
            return Err(Error::SynthSpec("zero labels".into()));
        }
        if self.labels.iter().all(|l| l.weight == 0) {
            return Err(Error::SynthSpec("all label weights are zero".into()));
        }
        if self.min_rows == 0 || self.min_rows > self.max_rows {
            return Err(Error::SynthSpec(format!(
                "invalid row range {}..={}",
                self.min_rows, self.max_rows
            )));
        }
        if !(0.0..1.0).contains(&self.unknown_fraction) {
            return Err(Error::SynthSpec(format!(
                "unknown_fraction {} outside [0, 1)",
                self.unknown_fraction
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for label in &self.labels {
            let parsed = SemanticLabel::from_parts(&label.class, Some(&label.property))
                .map_err(Error::SynthSpec)?;
            if !seen.insert(parsed) {
                return Err(Error::SynthSpec(format!(
                    "label ({},{}) listed twice",
                    label.class, label.property
                )));
            }
        }
        Ok(())
    }

    /// Total number of unknown columns across the corpus.
    pub fn unknown_columns(&self) -> usize {
        let known: usize = self.labels.iter().map(|l| l.weight).sum::<usize>() * self.num_sources;
        let f = self.unknown_fraction;
        (known as f64 * f / (1.0 - f)).round() as usize
    }
}

enum ColumnKind<'a> {
    Label(&'a SynthLabel),
    Unknown,
}

/// Generates a corpus; identical `(spec, seed)` always give identical output.
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<LabeledCorpus> {
    spec.validate()?;
    let mut rng = stream_rng(seed, 0);
    let digits = spec.num_sources.to_string().len().max(2);

    let unknown_total = spec.unknown_columns();
    let offset = rng.gen_range(0..spec.num_sources);
    let mut unknown_per_source = vec![0usize; spec.num_sources];
    for i in 0..unknown_total {
        unknown_per_source[(offset + i) % spec.num_sources] += 1;
    }

    let mut sources = Vec::with_capacity(spec.num_sources);
    let mut labels = LabelMap::new();
    for (s, &unknown_here) in unknown_per_source.iter().enumerate() {
        let name = format!("source_{:0width$}", s + 1, width = digits);
        let rows = rng.gen_range(spec.min_rows..=spec.max_rows);

        let mut kinds: Vec<ColumnKind> = spec
            .labels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l, l.weight).map(ColumnKind::Label))
            .collect();
        kinds.extend((0..unknown_here).map(|_| ColumnKind::Unknown));
        kinds.shuffle(&mut rng);

        let mut columns = Vec::with_capacity(kinds.len());
        let mut column_labels = Vec::with_capacity(kinds.len());
        for kind in &kinds {
            let (header, values, label) = match kind {
                ColumnKind::Label(l) => {
                    let header = pick(&mut rng, l.generator.headers()).to_string();
                    let style = ColumnStyle::draw(&mut rng);
                    let values = (0..rows)
                        .map(|_| style.cell(&mut rng, |r, d| l.generator.sample(r, d)))
                        .collect();
                    (header, values, SemanticLabel::known(&l.class, &l.property))
                }
                ColumnKind::Unknown => {
                    let header = pick(&mut rng, UNKNOWN_HEADERS).to_string();
                    let values = (0..rows).map(|_| mixture_value(&mut rng)).collect();
                    (header, values, SemanticLabel::Unknown)
                }
            };
            columns.push((header, values));
            column_labels.push(label);
        }
        let source = DataSource::new(name.clone(), columns)?;
        for (attr, label) in source.attributes.iter().zip(column_labels) {
            labels.insert((name.clone(), attr.name.clone()), label);
        }
        sources.push(source);
    }
    build_corpus(sources, labels, LabelMode::Strict)
}

/// Formatting habits of one generated column: a dominant dialect, how
/// consistently it is used, and how often cells are left blank.
struct ColumnStyle {
    dialect: usize,
    purity: f64,
    blank_rate: f64,
}

impl ColumnStyle {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        ColumnStyle {
            dialect: rng.gen_range(0..DIALECTS),
            purity: rng.gen_range(0.6..=1.0),
            blank_rate: rng.gen_range(0.0..0.1),
        }
    }

    fn cell(
        &self,
        rng: &mut ChaCha8Rng,
        sample: impl Fn(&mut ChaCha8Rng, usize) -> String,
    ) -> String {
        if rng.gen_bool(self.blank_rate) {
            return String::new();
        }
        let dialect = if rng.gen_bool(self.purity) {
            self.dialect
        } else {
            rng.gen_range(0..DIALECTS)
        };
        sample(rng, dialect)
    }
}

fn mixture_value(rng: &mut ChaCha8Rng) -> String {
    let slot = rng.gen_range(0..=GeneratorKind::ALL.len());
    match GeneratorKind::ALL.get(slot) {
        Some(kind) => {
            let dialect = rng.gen_range(0..DIALECTS);
            kind.sample(rng, dialect)
        }
        None => pick(rng, FREE_TEXT).to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn deterministic() {
        let spec = SynthSpec::standard(10, 8, 0.1, (200, 500)).unwrap();
        let a = generate_synthetic(&spec, 42).unwrap();
        let b = generate_synthetic(&spec, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&spec, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn standard_shape() {
        let spec = SynthSpec::standard(10, 8, 0.1, (200, 500)).unwrap();
        let corpus = generate_synthetic(&spec, 42).unwrap();
        assert_eq!(corpus.sources.len(), 10);
        assert_eq!(corpus.known_labels().len(), 8);
        let unknown = corpus.labels.values().filter(|l| l.is_unknown()).count();
        assert_eq!(unknown, spec.unknown_columns());
        assert_eq!(unknown, 9);
        for source in &corpus.sources {
            assert!((200..=500).contains(&source.num_rows()));
        }
    }

    #[test]
    fn imbalance_ratio_is_respected() {
        let mut spec = SynthSpec::standard(5, 2, 0.0, (10, 20)).unwrap();
        spec.labels[0].weight = 10;
        let corpus = generate_synthetic(&spec, 1).unwrap();
        let mut counts: HashMap<SemanticLabel, usize> = HashMap::new();
        for (_, label) in corpus.labeled_attributes() {
            *counts.entry(label.clone()).or_default() += 1;
        }
        let a = counts[&SemanticLabel::known("Person", "name")];
        let b = counts[&SemanticLabel::known("Person", "birthDate")];
        assert!((a as i64 - 10 * b as i64).abs() <= 1, "{a} vs {b}");
    }

    #[test]
    fn degenerate_single_label() {
        let spec = SynthSpec::standard(1, 1, 0.0, (5, 5)).unwrap();
        let corpus = generate_synthetic(&spec, 0).unwrap();
        let labels: Vec<_> = corpus.labels.values().collect();
        assert!(!labels.is_empty());
        assert!(labels
            .iter()
            .all(|l| **l == SemanticLabel::known("Person", "name")));
    }

    #[test]
    fn invalid_specs() {
        assert!(SynthSpec::standard(10, 0, 0.1, (1, 2))
            .and_then(|s| generate_synthetic(&s, 0))
            .is_err());
        assert!(SynthSpec::standard(0, 3, 0.1, (1, 2))
            .and_then(|s| generate_synthetic(&s, 0))
            .is_err());
        assert!(SynthSpec::standard(2, 3, 1.0, (1, 2))
            .and_then(|s| generate_synthetic(&s, 0))
            .is_err());
        assert!(SynthSpec::standard(2, 3, 0.1, (5, 2))
            .and_then(|s| generate_synthetic(&s, 0))
            .is_err());
    }
}
