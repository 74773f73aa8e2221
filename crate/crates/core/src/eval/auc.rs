use crate::{Error, Result};

/// Area under the ROC curve as the probability that a positive outscores a
/// negative, ties counting one half.
///
/// The result is computed from integer pair counts and rounded so that
/// `roc_auc(p, n) + roc_auc(n, p) == 1.0` exactly.
pub fn roc_auc(positives: &[f64], negatives: &[f64]) -> Result<f64> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::EmptyScores);
    }
    if positives.iter().chain(negatives).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("scores must not be NaN".into()));
    }
    let mut sorted = negatives.to_vec();
    sorted.sort_by(f64::total_cmp);
    // doubled pair credit: 2 per win, 1 per tie
    let mut credit: u128 = 0;
    for &p in positives {
        let below = sorted.partition_point(|&n| n < p);
        let not_above = sorted.partition_point(|&n| n <= p);
        credit += 2 * below as u128 + (not_above - below) as u128;
    }
    let total = 2 * positives.len() as u128 * negatives.len() as u128;
    Ok(complement_exact_ratio(credit, total))
}

/// `u / v`, evaluated from whichever side of one half it lies on so that the
/// results for `u` and `v - u` sum to exactly one.
fn complement_exact_ratio(u: u128, v: u128) -> f64 {
    if 2 * u <= v {
        u as f64 / v as f64
    } else {
        1.0 - (v - u) as f64 / v as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise(pos: &[f64], neg: &[f64]) -> f64 {
        let mut s = 0.0;
        for &p in pos {
            for &n in neg {
                s += if p > n {
                    1.0
                } else if p == n {
                    0.5
                } else {
                    0.0
                };
            }
        }
        s / (pos.len() * neg.len()) as f64
    }

    #[test]
    fn worked_values() {
        assert_eq!(roc_auc(&[2.0, 3.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[1.0], &[1.0]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[3.0, 1.0], &[2.0, 0.0]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(roc_auc(&[], &[1.0]), Err(Error::EmptyScores)));
        assert!(matches!(roc_auc(&[1.0], &[]), Err(Error::EmptyScores)));
        assert!(roc_auc(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn infinities_are_ordinary_scores() {
        assert_eq!(roc_auc(&[f64::INFINITY], &[f64::NEG_INFINITY, 0.0]).unwrap(), 1.0);
    }

    fn scores() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec((0i32..12).prop_map(|v| v as f64 * 0.5), 1..30)
    }

    proptest! {
        #[test]
        fn agrees_with_pairwise_count(pos in scores(), neg in scores()) {
            prop_assert!((roc_auc(&pos, &neg).unwrap() - pairwise(&pos, &neg)).abs() < 1e-12);
        }

        #[test]
        fn swapping_roles_complements(pos in scores(), neg in scores()) {
            prop_assert_eq!(roc_auc(&pos, &neg).unwrap() + roc_auc(&neg, &pos).unwrap(), 1.0);
        }

        #[test]
        fn rank_invariance(pos in scores(), neg in scores()) {
            let f = |v: &Vec<f64>| v.iter().map(|x| (x * 0.7).exp() - 3.0).collect::<Vec<_>>();
            prop_assert_eq!(roc_auc(&pos, &neg).unwrap(), roc_auc(&f(&pos), &f(&neg)).unwrap());
        }
    }
}
