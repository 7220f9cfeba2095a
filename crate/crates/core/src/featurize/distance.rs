//! String edit distance and global alignment.

use serde::{Deserialize, Serialize};

/// Unit-cost Levenshtein distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitute = diag + usize::from(ca != cb);
            diag = row[j + 1];
            row[j + 1] = substitute.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NwScoring {
    #[serde(rename = "match")]
    pub match_score: i64,
    pub mismatch: i64,
    pub gap: i64,
}

impl Default for NwScoring {
    fn default() -> Self {
        NwScoring {
            match_score: 2,
            mismatch: -1,
            gap: -2,
        }
    }
}

/// Needleman-Wunsch global alignment score with linear gap cost.
pub fn needleman_wunsch(a: &str, b: &str, scoring: NwScoring) -> i64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<i64> = (0..=b.len() as i64).map(|j| j * scoring.gap).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = (i as i64 + 1) * scoring.gap;
        for (j, cb) in b.iter().enumerate() {
            let pair = if ca == cb {
                scoring.match_score
            } else {
                scoring.mismatch
            };
            let best = (diag + pair)
                .max(row[j] + scoring.gap)
                .max(row[j + 1] + scoring.gap);
            diag = row[j + 1];
            row[j + 1] = best;
        }
    }
    row[b.len()]
}

/// Alignment score scaled by the best achievable score and clamped to `[0, 1]`.
///
/// Two empty strings are identical and score 1.
pub fn nw_similarity(a: &str, b: &str, scoring: NwScoring) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    let denom = scoring.match_score as f64 * longest as f64;
    if denom <= 0.0 {
        return 0.0;
    }
    (needleman_wunsch(a, b, scoring) as f64 / denom).clamp(0.0, 1.0)
}

/// Levenshtein distance divided by the longer length; `0` for two empty strings.
pub fn normalized_levenshtein(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / longest as f64
}
