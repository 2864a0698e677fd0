//! Partial hierarchies: chains `T1 > T2 > … > Tk` where each step clears the MID.
//!
//! The search seeds with every ordered pair, then grows credible chains one
//! treatment at a time. A chain can only be credible if its prefix and its
//! last pair are, so candidates are built as credible prefix + credible pair.

use std::collections::BTreeSet;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{Samples, SampleMatrix, Threshold};
use crate::taxonomy::{Mid, Question};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialHierarchy {
    pub chain: Vec<usize>,
    pub mid: Mid,
    pub count: u64,
}

impl PartialHierarchy {
    pub fn pi_hat(&self, k: usize) -> f64 {
        self.count as f64 / k as f64
    }

    pub fn question(&self) -> Question {
        Question::PartialHierarchy {
            chain: self.chain.clone(),
            mid: self.mid,
        }
    }
}

fn check_chain(chain: &[usize], n: usize) -> Result<()> {
    if chain.len() < 2 {
        return Err(Error::MalformedQuestion("a chain needs at least 2 treatments".into()));
    }
    if let Some(&t) = chain.iter().find(|&&t| t >= n) {
        return Err(Error::MalformedQuestion(format!("treatment index {t} out of range")));
    }
    let distinct: BTreeSet<_> = chain.iter().collect();
    if distinct.len() != chain.len() {
        return Err(Error::MalformedQuestion("chain repeats a treatment".into()));
    }
    Ok(())
}

/// Number of samples in which every consecutive pair of `chain` differs by at
/// least `mid` in favour of the earlier treatment.
pub fn chain_support(samples: &Samples, chain: &[usize], mid: Mid) -> Result<u64> {
    check_chain(chain, samples.n())?;
    samples.check_mid(mid)?;
    Ok(count_chain(samples, chain, mid))
}

fn count_chain(samples: &Samples, chain: &[usize], mid: Mid) -> u64 {
    (0..samples.k())
        .filter(|&r| samples.chain_holds(r, chain, mid))
        .count() as u64
}

/// Empirical probability of a chain given by treatment names.
pub fn evaluate_chain(m: &SampleMatrix, chain: &[&str], mid: f64) -> Result<f64> {
    let idx = chain
        .iter()
        .map(|name| m.index_of(name))
        .collect::<Result<Vec<_>>>()?;
    let samples = Samples::from_effects(m.clone());
    let count = chain_support(&samples, &idx, Mid::new(mid)?)?;
    Ok(count as f64 / m.k() as f64)
}

/// All n(n−1) ordered pairs with their support.
pub fn seed_size2(samples: &Samples, mid: Mid) -> Result<Vec<PartialHierarchy>> {
    samples.check_mid(mid)?;
    let n = samples.n();
    let pairs: Vec<Vec<usize>> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| vec![a, b]))
        .collect();
    Ok(evaluate_all(samples, pairs, mid))
}

fn evaluate_all(samples: &Samples, chains: Vec<Vec<usize>>, mid: Mid) -> Vec<PartialHierarchy> {
    let eval = |chain: Vec<usize>| PartialHierarchy {
        count: count_chain(samples, &chain, mid),
        chain,
        mid,
    };
    #[cfg(feature = "parallel")]
    return chains.into_par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    return chains.into_iter().map(eval).collect();
}

/// Appends `U` to every chain ending in `T` for each credible pair `(T, U)`
/// with `U` not already in the chain. Sorted and deduplicated; chains that
/// would exceed `max_size` are not produced.
pub fn expand_candidates(
    credible_k: &[Vec<usize>],
    credible_2: &[Vec<usize>],
    max_size: usize,
) -> Vec<Vec<usize>> {
    let mut out = BTreeSet::new();
    for chain in credible_k {
        if chain.len() >= max_size {
            continue;
        }
        let last = *chain.last().expect("chains are non-empty");
        for pair in credible_2.iter().filter(|p| p[0] == last) {
            if !chain.contains(&pair[1]) {
                let mut next = chain.clone();
                next.push(pair[1]);
                out.insert(next);
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PartialSearchOptions {
    /// Also require the chain without its first treatment to be credible.
    /// Never changes the result, only how many candidates get evaluated.
    pub suffix_pruning: bool,
}

/// Result of the level-wise search, with the number of chains evaluated per size.
#[derive(Clone, Debug, Default)]
pub struct PartialSearch {
    pub credible: Vec<PartialHierarchy>,
    pub evaluated_per_size: Vec<(usize, usize)>,
}

/// Credible chains of sizes 2..n−1, smallest first, each level in candidate
/// order. Stops at the first size with nothing credible.
pub fn uncover_partial_hierarchies(
    samples: &Samples,
    threshold: &Threshold,
    mid: Mid,
    options: PartialSearchOptions,
) -> Result<PartialSearch> {
    let n = samples.n();
    let k = samples.k();
    let mut search = PartialSearch::default();
    if n < 3 {
        return Ok(search);
    }
    let seeds = seed_size2(samples, mid)?;
    search.evaluated_per_size.push((2, seeds.len()));
    let mut level: Vec<PartialHierarchy> =
        seeds.into_iter().filter(|p| threshold.admits(p.count, k)).collect();
    let pairs: Vec<Vec<usize>> = level.iter().map(|p| p.chain.clone()).collect();
    let max_size = n - 1;
    while !level.is_empty() {
        let size = level[0].chain.len();
        let chains: Vec<Vec<usize>> = level.iter().map(|p| p.chain.clone()).collect();
        search.credible.append(&mut level);
        if size >= max_size {
            break;
        }
        let mut candidates = expand_candidates(&chains, &pairs, max_size);
        if options.suffix_pruning {
            let known: BTreeSet<&[usize]> = chains.iter().map(Vec::as_slice).collect();
            candidates.retain(|c| known.contains(&c[1..]));
        }
        search.evaluated_per_size.push((size + 1, candidates.len()));
        level = evaluate_all(samples, candidates, mid)
            .into_iter()
            .filter(|p| threshold.admits(p.count, k))
            .collect();
    }
    Ok(search)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{default_labels, Direction};

    fn samples(rows: Vec<Vec<f64>>) -> Samples {
        let n = rows[0].len();
        Samples::from_effects(SampleMatrix::new(default_labels(n), rows, Direction::Lower).unwrap())
    }

    #[test]
    fn pair_and_complement() {
        let s = samples(vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![0.0, 0.5]]);
        let ab = chain_support(&s, &[0, 1], Mid::ZERO).unwrap();
        let ba = chain_support(&s, &[1, 0], Mid::ZERO).unwrap();
        assert_eq!((ab, ba), (2, 1));
        assert_eq!(seed_size2(&s, Mid::ZERO).unwrap().len(), 2);
    }

    #[test]
    fn mid_is_inclusive() {
        let s = samples(vec![vec![0.0, 0.5, 1.0]]);
        let mid = Mid::new(0.5).unwrap();
        assert_eq!(chain_support(&s, &[0, 1, 2], mid).unwrap(), 1);
        assert_eq!(chain_support(&s, &[0, 1, 2], Mid::new(0.6).unwrap()).unwrap(), 0);
    }

    #[test]
    fn chain_errors() {
        let s = samples(vec![vec![0.0, 0.5, 1.0]]);
        assert!(chain_support(&s, &[0, 0], Mid::ZERO).is_err());
        assert!(chain_support(&s, &[0, 7], Mid::ZERO).is_err());
        assert!(chain_support(&s, &[0], Mid::ZERO).is_err());
        let m = SampleMatrix::new(default_labels(2), vec![vec![0.0, 1.0]], Direction::Lower).unwrap();
        assert!(matches!(evaluate_chain(&m, &["A", "Z"], 0.0), Err(Error::UnknownTreatment(_))));
    }

    #[test]
    fn expansion_uses_last_pair() {
        let pairs = vec![vec![0, 1], vec![1, 2], vec![1, 3], vec![2, 0]];
        let got = expand_candidates(&pairs, &pairs, 4);
        assert_eq!(got, vec![vec![0, 1, 2], vec![0, 1, 3], vec![1, 2, 0], vec![2, 0, 1]]);
        assert!(expand_candidates(&[], &pairs, 4).is_empty());
        assert!(expand_candidates(&pairs, &pairs, 2).is_empty());
    }

    #[test]
    fn separated_effects_give_the_full_chain() {
        let rows = vec![vec![0.0, 1.0, 2.0, 3.0]; 5];
        let s = samples(rows);
        let found = uncover_partial_hierarchies(
            &s,
            &Threshold::new(1.0).unwrap(),
            Mid::ZERO,
            PartialSearchOptions::default(),
        )
        .unwrap();
        // 6 pairs + 4 triples
        assert_eq!(found.credible.len(), 10);
        assert!(found.credible.iter().any(|p| p.chain == vec![0, 1, 2]));
        assert!(found.credible.iter().all(|p| p.chain.len() <= 3));
    }

    #[test]
    fn rank_only_input_needs_zero_mid() {
        let rm = crate::ingest::RankMatrix::from_orders(default_labels(3), vec![vec![2, 0, 1]]).unwrap();
        let s = Samples::from_ranks(rm);
        assert_eq!(chain_support(&s, &[2, 1], Mid::ZERO).unwrap(), 1);
        assert!(chain_support(&s, &[2, 1], Mid::new(0.1).unwrap()).is_err());
    }
}
