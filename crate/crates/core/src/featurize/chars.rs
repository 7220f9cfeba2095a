//! Character distributions over a fixed printable vocabulary.

use serde::{Deserialize, Serialize};

/// Vocabulary size: ASCII 0x20..=0x7E plus `\t \n \x0b \x0c \r`.
pub const VOCAB_SIZE: usize = 100;

/// Vocabulary characters in code-point order.
pub fn vocabulary() -> impl Iterator<Item = char> {
    ('\t'..='\r').chain(' '..='~')
}

/// Position of `c` in the vocabulary, or `None` for out-of-vocabulary characters.
pub fn vocab_index(c: char) -> Option<usize> {
    match c {
        '\t'..='\r' => Some(c as usize - '\t' as usize),
        ' '..='~' => Some(c as usize - ' ' as usize + 5),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharProfile {
    pub dist: Vec<f64>,
    /// Shannon entropy of `dist`, in bits.
    pub entropy: f64,
    /// In-vocabulary characters counted.
    pub total_chars: usize,
    /// Characters skipped because they are outside the vocabulary.
    pub skipped_chars: usize,
}

impl CharProfile {
    pub fn from_counts(counts: &[usize; VOCAB_SIZE], skipped_chars: usize) -> Self {
        let total: usize = counts.iter().sum();
        let dist: Vec<f64> = if total == 0 {
            vec![0.0; VOCAB_SIZE]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        let entropy = shannon_entropy(&dist);
        CharProfile {
            dist,
            entropy,
            total_chars: total,
            skipped_chars,
        }
    }
}

/// `-Σ p log2 p` over the nonzero entries.
pub fn shannon_entropy(dist: &[f64]) -> f64 {
    let h: f64 = dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// Character distribution of the concatenated values.
pub fn char_profile<S: AsRef<str>>(values: &[S]) -> CharProfile {
    let mut counts = [0usize; VOCAB_SIZE];
    let mut skipped = 0;
    for value in values {
        for c in value.as_ref().chars() {
            match vocab_index(c) {
                Some(i) => counts[i] += 1,
                None => skipped += 1,
            }
        }
    }
    CharProfile::from_counts(&counts, skipped)
}
