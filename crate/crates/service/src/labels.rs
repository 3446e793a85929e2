//! Blinded labels for route groups.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Approach ids in the order the fixed policy hands out labels.
pub const FIXED_ORDER: [&str; 4] = ["external", "plateaus", "dissimilarity", "penalty"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelPolicy {
    /// External provider, plateaus, dissimilarity, penalty get A, B, C, D;
    /// absent approaches are skipped and the labels close up.
    Fixed,
    /// A permutation drawn per query from `seed` and the query's sequence number.
    PerQueryShuffle { seed: u64 },
}

pub fn label_name(i: usize) -> String {
    assert!(i < 26, "at most 26 labels");
    char::from(b'A' + i as u8).to_string()
}

fn fixed_rank(approach: &str) -> usize {
    FIXED_ORDER
        .iter()
        .position(|a| *a == approach)
        .unwrap_or(FIXED_ORDER.len())
}

/// Pairs every approach with a label. The result is sorted by label.
pub fn assign_labels(
    approaches: &[String],
    policy: LabelPolicy,
    sequence: u64,
) -> Vec<(String, String)> {
    let mut order: Vec<&String> = approaches.iter().collect();
    // stable: unknown approaches keep their relative order after the known ones
    order.sort_by_key(|a| fixed_rank(a));
    if let LabelPolicy::PerQueryShuffle { seed } = policy {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(sequence);
        order.shuffle(&mut rng);
    }
    order
        .into_iter()
        .enumerate()
        .map(|(i, a)| (label_name(i), a.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
        xs.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn fixed_with_all_four() {
        let got = assign_labels(
            &ids(&["penalty", "plateaus", "external", "dissimilarity"]),
            LabelPolicy::Fixed,
            0,
        );
        assert_eq!(
            got,
            pairs(&[
                ("A", "external"),
                ("B", "plateaus"),
                ("C", "dissimilarity"),
                ("D", "penalty")
            ])
        );
    }

    #[test]
    fn fixed_compacts_missing_external() {
        let got = assign_labels(
            &ids(&["dissimilarity", "penalty", "plateaus"]),
            LabelPolicy::Fixed,
            3,
        );
        assert_eq!(
            got,
            pairs(&[("A", "plateaus"), ("B", "dissimilarity"), ("C", "penalty")])
        );
    }

    #[test]
    fn shuffle_is_reproducible() {
        let all = ids(&FIXED_ORDER);
        let policy = LabelPolicy::PerQueryShuffle { seed: 42 };
        for seq in 0..20 {
            assert_eq!(
                assign_labels(&all, policy, seq),
                assign_labels(&all, policy, seq)
            );
        }
        let distinct: std::collections::BTreeSet<_> = (0..40)
            .map(|seq| assign_labels(&all, policy, seq))
            .collect();
        assert!(distinct.len() > 5);
        let other = LabelPolicy::PerQueryShuffle { seed: 43 };
        assert!(
            (0..20).any(|seq| assign_labels(&all, policy, seq) != assign_labels(&all, other, seq))
        );
    }
}
