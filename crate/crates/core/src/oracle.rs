//! Brute-force reference: enumerate every question and test it sample by sample.
//!
//! Only for small networks. Nothing here shares code with the mining passes
//! beyond the question type and the threshold comparison.

use std::collections::BTreeSet;

use crate::arrangements::Supported;
use crate::error::{Error, Result};
use crate::ingest::{Samples, Threshold};
use crate::taxonomy::{canonicalize, Kind, Mid, Question};

/// Largest n enumerated without an explicit override.
pub const DEFAULT_N_CAP: usize = 7;

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    Ok(())
}

/// Whether `q` is true in sample `row`. `q` must be valid for the network.
pub fn indicator(samples: &Samples, q: &Question, row: usize) -> bool {
    let rm = samples.ranks();
    let rank = |t: usize| rm.rank(row, t);
    match q {
        Question::RankedPermutation { treatments, lo } => {
            treatments.iter().enumerate().all(|(i, &t)| rank(t) == lo + i)
        }
        Question::Permutation { treatments } => {
            treatments.windows(2).all(|w| rank(w[1]) == rank(w[0]) + 1)
        }
        Question::RankedCombination { treatments, lo } => {
            let hi = lo + treatments.len() - 1;
            treatments.iter().all(|&t| (*lo..=hi).contains(&rank(t)))
        }
        Question::Combination { treatments } => {
            let ranks: Vec<usize> = treatments.iter().map(|&t| rank(t)).collect();
            let lo = ranks.iter().min().unwrap();
            let hi = ranks.iter().max().unwrap();
            hi - lo + 1 == treatments.len()
        }
        Question::RankSet { treatment, ranks } => ranks.contains(&rank(*treatment)),
        Question::PartialHierarchy { chain, mid } => match samples.effects() {
            // every ordered pair, not just neighbours
            Some(m) => {
                let v = m.normalized_row(row);
                (0..chain.len()).all(|i| {
                    (i + 1..chain.len()).all(|j| v[chain[j]] - v[chain[i]] >= mid.value())
                })
            }
            None => chain.windows(2).all(|w| rank(w[0]) < rank(w[1])),
        },
    }
}

fn check_question(samples: &Samples, q: &Question) -> Result<()> {
    q.validate(samples.n())?;
    if let Some(mid) = q.mid() {
        samples.check_mid(mid)?;
    }
    Ok(())
}

/// Number of samples in which `q` holds.
pub fn evaluate_question(samples: &Samples, q: &Question) -> Result<u64> {
    check_question(samples, q)?;
    Ok((0..samples.k()).filter(|&r| indicator(samples, q, r)).count() as u64)
}

/// Number of samples in which all of `qs` hold at once.
pub fn joint_support(samples: &Samples, qs: &[Question]) -> Result<u64> {
    for q in qs {
        check_question(samples, q)?;
    }
    Ok((0..samples.k())
        .filter(|&r| qs.iter().all(|q| indicator(samples, q, r)))
        .count() as u64)
}

/// Ordered selections of `size` distinct treatments out of `n`.
fn sequences(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for t in 0..n {
            if !cur.contains(&t) {
                cur.push(t);
                go(n, size, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, size, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Sorted subsets of `size` elements out of `0..n`.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// Every question the mining passes can report for `kind`, before any
/// equivalence is applied. Ranked permutations are the exception: a complete
/// hierarchy is only ever reported in canonical form.
fn reportable(n: usize, kind: Kind, mid: Mid) -> Vec<Question> {
    let mut out = Vec::new();
    match kind {
        Kind::RankedPermutation => {
            let mut set = BTreeSet::new();
            for size in 2..=n {
                for ts in sequences(n, size) {
                    for lo in 1..=(n - size + 1) {
                        let q = Question::RankedPermutation {
                            treatments: ts.clone(),
                            lo,
                        };
                        set.insert(canonicalize(&q, n).expect("well-formed"));
                    }
                }
            }
            out.extend(set);
        }
        Kind::Permutation => {
            for size in 2..n {
                out.extend(sequences(n, size).into_iter().map(|treatments| Question::Permutation { treatments }));
            }
        }
        Kind::PartialHierarchy => {
            for size in 2..n {
                out.extend(
                    sequences(n, size)
                        .into_iter()
                        .map(|chain| Question::PartialHierarchy { chain, mid }),
                );
            }
        }
        Kind::RankedCombination => {
            for size in 2..n {
                for ts in subsets(n, size) {
                    for lo in 1..=(n - size + 1) {
                        out.push(Question::RankedCombination {
                            treatments: ts.clone(),
                            lo,
                        });
                    }
                }
            }
        }
        Kind::Combination => {
            for size in 2..n {
                out.extend(subsets(n, size).into_iter().map(|treatments| Question::Combination { treatments }));
            }
        }
        Kind::RankSet => {
            for t in 0..n {
                for size in 1..n {
                    for ranks in subsets(n, size) {
                        out.push(Question::RankSet {
                            treatment: t,
                            ranks: ranks.into_iter().map(|r| r + 1).collect(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Every distinct question of `kind` in a network of `n` treatments, after
/// equivalent forms are merged. Size-2 partial hierarchies are listed in one
/// orientation only, since each answers its reverse.
pub fn enumerate_all_questions(n: usize, kind: Kind, cap: usize) -> Result<Vec<Question>> {
    check_cap(n, cap)?;
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 treatments, got {n}")));
    }
    let mut set = BTreeSet::new();
    for q in reportable(n, kind, Mid::ZERO) {
        let skip = matches!(&q, Question::PartialHierarchy { chain, .. } if chain.len() == 2 && chain[0] > chain[1]);
        if !skip {
            set.insert(canonicalize(&q, n)?);
        }
    }
    Ok(set.into_iter().collect())
}

/// Reference catalog for one network: every credible question with its support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCatalog {
    pub n: usize,
    pub k: usize,
    /// Sorted by question.
    pub entries: Vec<Supported>,
}

/// Highest-density region found by searching all rank subsets: the smallest
/// subset meeting τ whose ranks are each at least as likely as any rank left
/// out, lowest ranks first on ties. `None` when that subset is every rank.
fn brute_force_hdr(samples: &Samples, t: usize, threshold: &Threshold) -> Option<Question> {
    let n = samples.n();
    let k = samples.k();
    let support = |ranks: &[usize]| {
        (0..k)
            .filter(|&r| indicator(samples, &Question::RankSet { treatment: t, ranks: ranks.to_vec() }, r))
            .count() as u64
    };
    // single-rank counts, for the density-ordering test only
    let single: Vec<u64> = (1..=n)
        .map(|r| (0..k).filter(|&row| samples.ranks().rank(row, t) == r).count() as u64)
        .collect();
    for size in 1..=n {
        let mut best: Option<Vec<usize>> = None;
        for subset in subsets(n, size) {
            let ranks: Vec<usize> = subset.iter().map(|r| r + 1).collect();
            let min_in = subset.iter().map(|&r| single[r]).min().unwrap();
            let max_out = (0..n).filter(|r| !subset.contains(r)).map(|r| single[r]).max();
            if max_out.is_some_and(|m| m > min_in) {
                continue;
            }
            let mass = if size == n { k as u64 } else { support(&ranks) };
            if threshold.admits(mass, k) && best.as_ref().is_none_or(|b| ranks < *b) {
                best = Some(ranks);
            }
        }
        if let Some(ranks) = best {
            return (ranks.len() < n).then_some(Question::RankSet { treatment: t, ranks });
        }
    }
    None
}

/// Evaluates every reportable question directly and keeps the credible ones.
/// Rank sets are represented by each treatment's highest-density region.
pub fn brute_force_catalog(
    samples: &Samples,
    threshold: &Threshold,
    mid: Mid,
    n_cap: usize,
) -> Result<OracleCatalog> {
    let n = samples.n();
    let k = samples.k();
    check_cap(n, n_cap)?;
    samples.check_mid(mid)?;
    let mut entries = Vec::new();
    for kind in Kind::ALL {
        if kind == Kind::RankSet {
            for t in 0..n {
                if let Some(q) = brute_force_hdr(samples, t, threshold) {
                    let count = evaluate_question(samples, &q)?;
                    entries.push(Supported { question: q, count });
                }
            }
            continue;
        }
        for q in reportable(n, kind, mid) {
            let count = evaluate_question(samples, &q)?;
            if threshold.admits(count, k) {
                entries.push(Supported { question: q, count });
            }
        }
    }
    entries.sort_by(|a, b| a.question.cmp(&b.question));
    Ok(OracleCatalog { n, k, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{default_labels, RankMatrix};
    use crate::taxonomy::count_total;

    fn one_row(order: Vec<usize>) -> Samples {
        let n = order.len();
        Samples::from_ranks(RankMatrix::from_orders(default_labels(n), vec![order]).unwrap())
    }

    #[test]
    fn enumeration_matches_closed_forms() {
        for n in 2..=6 {
            let c = count_total(n).unwrap();
            for kind in Kind::ALL {
                let got = enumerate_all_questions(n, kind, DEFAULT_N_CAP).unwrap().len() as u128;
                assert_eq!(got, c.get(kind), "n = {n}, {kind}");
            }
        }
    }

    #[test]
    fn enumeration_respects_the_cap() {
        assert!(matches!(
            enumerate_all_questions(12, Kind::Combination, DEFAULT_N_CAP),
            Err(Error::OracleCap { n: 12, cap: 7 })
        ));
        let two = enumerate_all_questions(2, Kind::RankedPermutation, DEFAULT_N_CAP).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn direct_semantics() {
        let s = one_row(vec![0, 1, 2, 3, 4]);
        let perm = |ts: &[usize]| Question::Permutation { treatments: ts.to_vec() };
        assert_eq!(evaluate_question(&s, &perm(&[1, 2, 3])).unwrap(), 1);
        assert_eq!(evaluate_question(&s, &perm(&[2, 1, 3])).unwrap(), 0);
        let combo = Question::Combination { treatments: vec![1, 3] };
        assert_eq!(evaluate_question(&s, &combo).unwrap(), 0);
        let rs = Question::RankSet { treatment: 4, ranks: vec![2, 5] };
        assert_eq!(evaluate_question(&s, &rs).unwrap(), 1);
        let rc = Question::RankedCombination { treatments: vec![2, 3], lo: 3 };
        assert_eq!(evaluate_question(&s, &rc).unwrap(), 1);
        let bad = Question::Combination { treatments: vec![3, 1] };
        assert!(evaluate_question(&s, &bad).is_err());
    }

    #[test]
    fn joint_of_complements_is_empty() {
        let s = one_row(vec![0, 1, 2]);
        let ab = Question::PartialHierarchy { chain: vec![0, 1], mid: Mid::ZERO };
        let ba = Question::PartialHierarchy { chain: vec![1, 0], mid: Mid::ZERO };
        assert_eq!(joint_support(&s, std::slice::from_ref(&ab)).unwrap(), 1);
        assert_eq!(joint_support(&s, &[ab, ba]).unwrap(), 0);
    }

    #[test]
    fn unreachable_threshold_gives_empty_catalog() {
        let rows = vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ];
        let s = Samples::from_ranks(RankMatrix::from_orders(default_labels(3), rows).unwrap());
        let cat = brute_force_catalog(&s, &Threshold::new(1.0).unwrap(), Mid::ZERO, 7).unwrap();
        assert!(cat.entries.is_empty(), "{:?}", cat.entries);
    }
}
