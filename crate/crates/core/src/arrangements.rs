//! Ranked and unranked permutations and combinations.
//!
//! Every contiguous window of every observed hierarchy is counted once as a
//! ranked permutation. The other three arrangement kinds are sums over groups
//! of those counts, so they never touch the samples again.

use std::collections::{BTreeMap, HashMap};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::ingest::{RankMatrix, Threshold};
use crate::taxonomy::{canonicalize, Kind, Question};

/// Integer support counts for questions of one kind, out of `k` samples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyTable {
    kind: Kind,
    n: usize,
    k: usize,
    counts: BTreeMap<Question, u64>,
}

impl FrequencyTable {
    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, q: &Question) -> u64 {
        self.counts.get(q).copied().unwrap_or(0)
    }

    pub fn pi_hat(&self, q: &Question) -> f64 {
        self.count(q) as f64 / self.k as f64
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Question, u64)> {
        self.counts.iter().map(|(q, &c)| (q, c))
    }

    fn regroup(&self, kind: Kind, key: impl Fn(&Question) -> Option<Question>) -> FrequencyTable {
        let mut counts = BTreeMap::new();
        for (q, c) in self.iter() {
            if let Some(g) = key(q) {
                *counts.entry(g).or_insert(0) += c;
            }
        }
        FrequencyTable {
            kind,
            n: self.n,
            k: self.k,
            counts,
        }
    }
}

/// A question paired with the number of samples in which it holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supported {
    pub question: Question,
    pub count: u64,
}

impl Supported {
    pub fn pi_hat(&self, k: usize) -> f64 {
        self.count as f64 / k as f64
    }
}

type WindowCounts = HashMap<(Vec<usize>, usize), u64>;

fn count_windows(rm: &RankMatrix, rows: std::ops::Range<usize>) -> WindowCounts {
    let n = rm.n();
    let mut counts = WindowCounts::new();
    for r in rows {
        let row = rm.row(r);
        for size in 2..=n {
            for start in 0..=(n - size) {
                *counts
                    .entry((row[start..start + size].to_vec(), start + 1))
                    .or_insert(0) += 1;
            }
        }
    }
    counts
}

fn merge(mut a: WindowCounts, b: WindowCounts) -> WindowCounts {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (key, c) in b {
        *a.entry(key).or_insert(0) += c;
    }
    a
}

const ROWS_PER_TASK: usize = 256;

/// Counts every observed window (sizes 2..n, every starting rank) of every sample.
///
/// The result is keyed by raw window; complete hierarchies appear at size n and
/// are only folded onto their canonical form by [`credible_ranked_permutations`].
pub fn tabulate_ranked_permutations(rm: &RankMatrix) -> FrequencyTable {
    let k = rm.k();
    let chunks: Vec<std::ops::Range<usize>> = (0..k)
        .step_by(ROWS_PER_TASK)
        .map(|s| s..(s + ROWS_PER_TASK).min(k))
        .collect();
    #[cfg(feature = "parallel")]
    let windows = chunks
        .into_par_iter()
        .map(|rows| count_windows(rm, rows))
        .reduce(WindowCounts::new, merge);
    #[cfg(not(feature = "parallel"))]
    let windows = chunks
        .into_iter()
        .map(|rows| count_windows(rm, rows))
        .fold(WindowCounts::new(), merge);
    let counts = windows
        .into_iter()
        .map(|((treatments, lo), c)| (Question::RankedPermutation { treatments, lo }, c))
        .collect();
    FrequencyTable {
        kind: Kind::RankedPermutation,
        n: rm.n(),
        k,
        counts,
    }
}

fn window_parts(q: &Question) -> (&[usize], usize) {
    match q {
        Question::RankedPermutation { treatments, lo } => (treatments, *lo),
        other => panic!("expected a ranked permutation window, got {other:?}"),
    }
}

/// Groups ranked-permutation windows of size 2..n−1 by order, summing over spans.
pub fn aggregate_permutations(windows: &FrequencyTable) -> FrequencyTable {
    let n = windows.n;
    windows.regroup(Kind::Permutation, |q| {
        let (ts, _) = window_parts(q);
        (ts.len() < n).then(|| Question::Permutation {
            treatments: ts.to_vec(),
        })
    })
}

/// Groups ranked-permutation windows of size 2..n−1 by (treatment set, span).
///
/// Bottom-anchored blocks are kept as observed; their equivalence with the
/// complementary top block is a trimming concern.
pub fn aggregate_ranked_combinations(windows: &FrequencyTable) -> FrequencyTable {
    let n = windows.n;
    windows.regroup(Kind::RankedCombination, |q| {
        let (ts, lo) = window_parts(q);
        (ts.len() < n).then(|| {
            let mut treatments = ts.to_vec();
            treatments.sort_unstable();
            Question::RankedCombination { treatments, lo }
        })
    })
}

/// Groups ranked combinations by treatment set, summing over spans.
pub fn aggregate_combinations(ranked: &FrequencyTable) -> FrequencyTable {
    ranked.regroup(Kind::Combination, |q| match q {
        Question::RankedCombination { treatments, .. } => Some(Question::Combination {
            treatments: treatments.clone(),
        }),
        other => panic!("expected a ranked combination, got {other:?}"),
    })
}

/// Output order inside one kind: size, span, descending support, then question.
pub(crate) fn catalog_order(a: &Supported, b: &Supported) -> std::cmp::Ordering {
    a.question
        .size()
        .cmp(&b.question.size())
        .then_with(|| a.question.span().cmp(&b.question.span()))
        .then_with(|| b.count.cmp(&a.count))
        .then_with(|| a.question.cmp(&b.question))
}

/// Entries meeting the threshold, in catalog order.
pub fn filter_credible(table: &FrequencyTable, threshold: &Threshold) -> Vec<Supported> {
    let mut out: Vec<Supported> = table
        .iter()
        .filter(|(_, c)| threshold.admits(*c, table.k))
        .map(|(q, c)| Supported {
            question: q.clone(),
            count: c,
        })
        .collect();
    out.sort_by(catalog_order);
    out
}

/// Credible ranked permutations in canonical form: windows that are their own
/// canonical representative. A complete hierarchy shows up once, as its
/// top-anchored window of length n−1.
pub fn credible_ranked_permutations(windows: &FrequencyTable, threshold: &Threshold) -> Vec<Supported> {
    let n = windows.n;
    filter_credible(windows, threshold)
        .into_iter()
        .filter(|s| canonicalize(&s.question, n).is_ok_and(|c| c == s.question))
        .collect()
}

/// The four credible arrangement lists derived from one tabulation.
#[derive(Clone, Debug, Default)]
pub struct Arrangements {
    pub ranked_permutations: Vec<Supported>,
    pub permutations: Vec<Supported>,
    pub ranked_combinations: Vec<Supported>,
    pub combinations: Vec<Supported>,
}

pub fn uncover_arrangements(rm: &RankMatrix, threshold: &Threshold) -> Arrangements {
    let windows = tabulate_ranked_permutations(rm);
    let ranked = aggregate_ranked_combinations(&windows);
    Arrangements {
        ranked_permutations: credible_ranked_permutations(&windows, threshold),
        permutations: filter_credible(&aggregate_permutations(&windows), threshold),
        combinations: filter_credible(&aggregate_combinations(&ranked), threshold),
        ranked_combinations: filter_credible(&ranked, threshold),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::default_labels;

    fn rm(rows: Vec<Vec<usize>>) -> RankMatrix {
        let n = rows[0].len();
        RankMatrix::from_orders(default_labels(n), rows).unwrap()
    }

    fn rp(ts: &[usize], lo: usize) -> Question {
        Question::RankedPermutation {
            treatments: ts.to_vec(),
            lo,
        }
    }

    #[test]
    fn single_sample_windows() {
        let t = tabulate_ranked_permutations(&rm(vec![vec![0, 1, 2]]));
        assert_eq!(t.len(), 3);
        for q in [rp(&[0, 1], 1), rp(&[1, 2], 2), rp(&[0, 1, 2], 1)] {
            assert_eq!(t.pi_hat(&q), 1.0);
        }
        let credible = credible_ranked_permutations(&t, &Threshold::new(1.0).unwrap());
        // (B,C)_2^3 and (A,B,C)_1^3 both fold onto (A,B)_1^2 for n = 3
        assert_eq!(credible.len(), 1);
        assert_eq!(credible[0].question, rp(&[0, 1], 1));
    }

    #[test]
    fn aggregation_sums_counts() {
        let t = tabulate_ranked_permutations(&rm(vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 2, 3],
            vec![2, 3, 0, 1],
        ]));
        let perms = aggregate_permutations(&t);
        assert_eq!(perms.count(&Question::Permutation { treatments: vec![0, 1] }), 2);
        assert_eq!(perms.count(&Question::Permutation { treatments: vec![2, 3] }), 3);
        let ranked = aggregate_ranked_combinations(&t);
        let ab = Question::RankedCombination {
            treatments: vec![0, 1],
            lo: 1,
        };
        assert_eq!(ranked.count(&ab), 2);
        let combos = aggregate_combinations(&ranked);
        assert_eq!(combos.count(&Question::Combination { treatments: vec![0, 1] }), 3);
        // no size-n entries survive aggregation
        assert!(perms.iter().all(|(q, _)| q.size() < 4));
    }

    #[test]
    fn window_count_identity() {
        let t = tabulate_ranked_permutations(&rm(vec![vec![3, 1, 0, 2, 4]; 7]));
        let total: u64 = t.iter().map(|(_, c)| c).sum();
        let per_row: u64 = (2..=5).map(|s| 5 - s + 1).sum();
        assert_eq!(total, 7 * per_row);
    }

    #[test]
    fn filter_orders_by_size_span_and_support() {
        let t = tabulate_ranked_permutations(&rm(vec![
            vec![0, 1, 2, 3],
            vec![0, 1, 3, 2],
            vec![0, 1, 2, 3],
        ]));
        let out = filter_credible(&t, &Threshold::new(0.3).unwrap());
        let sizes: Vec<usize> = out.iter().map(|s| s.question.size()).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out[0].question, rp(&[0, 1], 1));
        // every observed entry passes a tiny threshold
        assert_eq!(filter_credible(&t, &Threshold::new(1e-9).unwrap()).len(), t.len());
    }
}
