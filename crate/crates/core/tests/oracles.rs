//! Randomized comparisons against independent reference implementations.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{entropy_oracle, levenshtein_oracle, nw_oracle};
use semlabel::evaluate::{mrr, PredictionRanking};
use semlabel::featurize::{char_profile, levenshtein, needleman_wunsch, NwScoring};
use semlabel::models::gini_impurity;
use semlabel::SemanticLabel;

fn word() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[abcé ]{0,12}").unwrap()
}

fn scoring() -> impl Strategy<Value = NwScoring> {
    (0i64..4, -3i64..1, -3i64..0).prop_map(|(m, x, g)| NwScoring {
        match_score: m,
        mismatch: x,
        gap: g,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn levenshtein_matches_oracle(a in word(), b in word()) {
        prop_assert_eq!(levenshtein(&a, &b), levenshtein_oracle(&a, &b));
    }

    #[test]
    fn levenshtein_is_a_metric(a in word(), b in word(), c in word()) {
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
        prop_assert_eq!(levenshtein(&a, &a), 0);
    }

    #[test]
    fn needleman_wunsch_matches_oracle_and_is_symmetric(a in word(), b in word(), s in scoring()) {
        let score = needleman_wunsch(&a, &b, s);
        prop_assert_eq!(score, nw_oracle(&a, &b, s.match_score, s.mismatch, s.gap));
        prop_assert_eq!(score, needleman_wunsch(&b, &a, s));
    }

    #[test]
    fn entropy_matches_direct_sum(values in proptest::collection::vec("[ -~\t\n\u{e9}]{0,8}", 0..6)) {
        let p = char_profile(&values);
        prop_assert!((p.entropy - entropy_oracle(&values)).abs() <= 1e-12);
        if p.total_chars > 0 {
            prop_assert!((p.dist.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(p.entropy <= 100f64.log2() + 1e-12);
        } else {
            prop_assert!(p.dist.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn gini_matches_formula(counts in proptest::collection::vec(0usize..50, 1..8)) {
        let n: usize = counts.iter().sum();
        prop_assume!(n > 0);
        let oracle: f64 = counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n as f64;
                p * (1.0 - p)
            })
            .sum();
        prop_assert!((gini_impurity(&counts) - oracle).abs() <= 1e-12);
    }
}

#[test]
fn mrr_matches_brute_force_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let n_labels = rng.gen_range(1..8);
        let labels: Vec<SemanticLabel> = (0..n_labels)
            .map(|i| SemanticLabel::known(format!("C{i}"), "p"))
            .collect();
        let n_rankings = rng.gen_range(1..10);
        let mut rankings = Vec::new();
        let mut expected = 0.0;
        for _ in 0..n_rankings {
            // coarse probabilities so ties are common
            let raw: Vec<f64> = (0..n_labels).map(|_| rng.gen_range(1..5) as f64).collect();
            let sum: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let truth = if rng.gen_bool(0.1) {
                SemanticLabel::Unknown
            } else {
                labels[rng.gen_range(0..n_labels)].clone()
            };
            // rank = 1 + labels strictly better, or equal and lexicographically smaller
            expected += match labels.iter().position(|l| *l == truth) {
                None => 0.0,
                Some(t) => {
                    let better = (0..n_labels)
                        .filter(|&j| {
                            probs[j] > probs[t]
                                || (probs[j] == probs[t] && labels[j].id() < labels[t].id())
                        })
                        .count();
                    1.0 / (better + 1) as f64
                }
            };
            rankings.push(
                PredictionRanking::from_probabilities("s", "a", &labels, &probs, Some(truth))
                    .unwrap(),
            );
        }
        expected /= n_rankings as f64;
        assert!((mrr(&rankings).unwrap() - expected).abs() <= 1e-12);
    }
}

#[test]
fn documented_distance_examples() {
    assert_eq!(levenshtein("employer", "employee"), 1);
    assert_eq!(levenshtein("", "abc"), 3);
    let unit = NwScoring {
        match_score: 1,
        mismatch: -1,
        gap: -1,
    };
    assert_eq!(needleman_wunsch("GATT", "GAT", unit), 2);
    assert_eq!(needleman_wunsch("semantic", "semantic", unit), 8);
    assert_eq!(needleman_wunsch("", "ab", unit), -2);
}
