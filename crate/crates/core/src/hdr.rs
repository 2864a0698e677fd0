//! Rankograms and highest-density rank regions.

use serde::Serialize;

use crate::ingest::{RankMatrix, Threshold};
use crate::taxonomy::Question;

/// How often one treatment took each rank, as integer counts out of `total`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankDistribution {
    pub treatment: usize,
    /// `counts[r]` is the number of samples placing the treatment at rank `r + 1`.
    pub counts: Vec<u64>,
    pub total: u64,
}

impl RankDistribution {
    /// Builds a distribution from arbitrary non-negative weights, e.g. rank
    /// probabilities scaled to integers.
    pub fn from_weights(treatment: usize, weights: Vec<u64>) -> Self {
        let total = weights.iter().sum();
        RankDistribution {
            treatment,
            counts: weights,
            total,
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

pub fn rank_distributions(rm: &RankMatrix) -> Vec<RankDistribution> {
    let n = rm.n();
    let mut counts = vec![vec![0u64; n]; n];
    for r in 0..rm.k() {
        for (rank, &t) in rm.row(r).iter().enumerate() {
            counts[t][rank] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(t, c)| RankDistribution {
            treatment: t,
            counts: c,
            total: rm.k() as u64,
        })
        .collect()
}

/// Highest-density region of one treatment's ranks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HdrSet {
    pub treatment: usize,
    /// Sorted one-based ranks.
    pub ranks: Vec<usize>,
    /// Samples whose rank falls in `ranks`.
    pub mass: u64,
    pub total: u64,
}

impl HdrSet {
    pub fn pi_hat(&self) -> f64 {
        self.mass as f64 / self.total as f64
    }

    /// The matching rank-set question, unless the region covers every rank
    /// (which asks nothing).
    pub fn question(&self, n: usize) -> Option<Question> {
        (self.ranks.len() < n).then(|| Question::RankSet {
            treatment: self.treatment,
            ranks: self.ranks.clone(),
        })
    }
}

/// Drops the least probable rank while what remains still meets τ.
///
/// Equal probabilities are dropped from the highest rank down.
pub fn hdr_set(d: &RankDistribution, threshold: &Threshold) -> HdrSet {
    let mut removal: Vec<usize> = (0..d.counts.len()).collect();
    removal.sort_by(|&a, &b| d.counts[a].cmp(&d.counts[b]).then(b.cmp(&a)));
    let mut kept = vec![true; d.counts.len()];
    let mut mass = d.total;
    for &r in &removal[..removal.len() - 1] {
        let remaining = mass - d.counts[r];
        if !threshold.admits_probability(remaining as f64 / d.total as f64) {
            break;
        }
        kept[r] = false;
        mass = remaining;
    }
    HdrSet {
        treatment: d.treatment,
        ranks: (0..kept.len()).filter(|&r| kept[r]).map(|r| r + 1).collect(),
        mass,
        total: d.total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::default_labels;

    fn hdr(weights: &[u64], tau: f64) -> Vec<usize> {
        let d = RankDistribution::from_weights(0, weights.to_vec());
        hdr_set(&d, &Threshold::new(tau).unwrap()).ranks
    }

    #[test]
    fn unimodal_region() {
        assert_eq!(hdr(&[1, 1, 5, 150, 400, 300, 140, 2, 1], 0.95), vec![4, 5, 6, 7]);
    }

    #[test]
    fn bimodal_region() {
        assert_eq!(hdr(&[550, 30, 10, 410], 0.95), vec![1, 4]);
    }

    #[test]
    fn dominant_rank_alone() {
        assert_eq!(hdr(&[960, 20, 20], 0.95), vec![1]);
        assert_eq!(hdr(&[20, 960, 20], 0.95), vec![2]);
    }

    #[test]
    fn ties_drop_the_higher_rank_first() {
        assert_eq!(hdr(&[1, 1], 0.5), vec![1]);
        assert_eq!(hdr(&[2, 1, 1], 0.75), vec![1, 2]);
    }

    #[test]
    fn rankogram_from_single_sample() {
        let rm = RankMatrix::from_orders(default_labels(3), vec![vec![2, 0, 1]]).unwrap();
        let d = rank_distributions(&rm);
        assert_eq!(d[2].counts, vec![1, 0, 0]);
        assert_eq!(d[0].counts, vec![0, 1, 0]);
        let set = hdr_set(&d[0], &Threshold::new(0.95).unwrap());
        assert_eq!((set.ranks.clone(), set.mass), (vec![2], 1));
        assert_eq!(set.question(3), Some(Question::RankSet { treatment: 0, ranks: vec![2] }));
    }

    #[test]
    fn full_region_is_not_a_question() {
        let d = RankDistribution::from_weights(0, vec![50, 50]);
        let set = hdr_set(&d, &Threshold::new(0.99).unwrap());
        assert_eq!(set.ranks, vec![1, 2]);
        assert!(set.question(2).is_none());
    }
}
