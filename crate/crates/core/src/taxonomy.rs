//! The six kinds of binary hierarchy question and how many distinct ones exist.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    RankedPermutation,
    Permutation,
    PartialHierarchy,
    RankedCombination,
    Combination,
    RankSet,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::RankedPermutation,
        Kind::Permutation,
        Kind::PartialHierarchy,
        Kind::RankedCombination,
        Kind::Combination,
        Kind::RankSet,
    ];

    /// Position in reports: ranked and unranked arrangements, then partial
    /// hierarchies, then rank sets.
    pub fn report_order(self) -> u8 {
        match self {
            Kind::RankedPermutation => 0,
            Kind::Permutation => 1,
            Kind::RankedCombination => 2,
            Kind::Combination => 3,
            Kind::PartialHierarchy => 4,
            Kind::RankSet => 5,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Kind::RankedPermutation => "RP",
            Kind::Permutation => "P",
            Kind::PartialHierarchy => "PH",
            Kind::RankedCombination => "RC",
            Kind::Combination => "C",
            Kind::RankSet => "RS",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Kind::RankedPermutation => "Ranked permutation",
            Kind::Permutation => "Permutation",
            Kind::PartialHierarchy => "Partial hierarchy",
            Kind::RankedCombination => "Ranked combination",
            Kind::Combination => "Combination",
            Kind::RankSet => "Rank set (HDR)",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

/// Minimally important difference: finite, non-negative, compared bitwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct Mid(f64);

impl Mid {
    pub const ZERO: Mid = Mid(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "MID must be finite and non-negative, got {value}"
            )));
        }
        // fold -0.0 into 0.0 so equality and hashing agree
        Ok(Mid(value + 0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl PartialEq for Mid {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Mid {}

impl Hash for Mid {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Mid {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mid {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// A binary question about the true treatment hierarchy.
///
/// Treatments are column indices into the label list. Ranks are one-based.
/// Combination treatment lists and rank sets are kept sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Question {
    /// Treatments hold ranks `lo..lo + len - 1` in the given order.
    RankedPermutation { treatments: Vec<usize>, lo: usize },
    /// Treatments hold consecutive ranks somewhere, in the given order.
    Permutation { treatments: Vec<usize> },
    /// Each treatment beats the next by at least `mid`, others may interleave.
    PartialHierarchy { chain: Vec<usize>, mid: Mid },
    /// Treatments hold ranks `lo..lo + len - 1` in any order.
    RankedCombination { treatments: Vec<usize>, lo: usize },
    /// Treatments hold consecutive ranks somewhere, in any order.
    Combination { treatments: Vec<usize> },
    /// One treatment's rank lies in `ranks`.
    RankSet { treatment: usize, ranks: Vec<usize> },
}

impl Question {
    pub fn kind(&self) -> Kind {
        match self {
            Question::RankedPermutation { .. } => Kind::RankedPermutation,
            Question::Permutation { .. } => Kind::Permutation,
            Question::PartialHierarchy { .. } => Kind::PartialHierarchy,
            Question::RankedCombination { .. } => Kind::RankedCombination,
            Question::Combination { .. } => Kind::Combination,
            Question::RankSet { .. } => Kind::RankSet,
        }
    }

    pub fn treatments(&self) -> &[usize] {
        match self {
            Question::RankedPermutation { treatments, .. }
            | Question::Permutation { treatments }
            | Question::RankedCombination { treatments, .. }
            | Question::Combination { treatments } => treatments,
            Question::PartialHierarchy { chain, .. } => chain,
            Question::RankSet { treatment, .. } => std::slice::from_ref(treatment),
        }
    }

    pub fn size(&self) -> usize {
        self.treatments().len()
    }

    /// Rank span `(lo, hi)` of ranked kinds.
    pub fn span(&self) -> Option<(usize, usize)> {
        match self {
            Question::RankedPermutation { treatments, lo }
            | Question::RankedCombination { treatments, lo } => {
                Some((*lo, lo + treatments.len() - 1))
            }
            _ => None,
        }
    }

    pub fn mid(&self) -> Option<Mid> {
        match self {
            Question::PartialHierarchy { mid, .. } => Some(*mid),
            _ => None,
        }
    }

    pub fn ranks(&self) -> Option<&[usize]> {
        match self {
            Question::RankSet { ranks, .. } => Some(ranks),
            _ => None,
        }
    }

    /// Checks the structural limits for a network of `n` treatments.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedQuestion(msg));
        let ts = self.treatments();
        if let Some(&t) = ts.iter().find(|&&t| t >= n) {
            return bad(format!("treatment index {t} out of range for n = {n}"));
        }
        let mut sorted = ts.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("repeated treatment".into());
        }
        let max_size = match self.kind() {
            Kind::RankedPermutation => n,
            Kind::RankSet => 1,
            _ => n.saturating_sub(1),
        };
        if self.kind() != Kind::RankSet && (ts.len() < 2 || ts.len() > max_size) {
            return bad(format!(
                "{} of size {} outside 2..={max_size}",
                self.kind(),
                ts.len()
            ));
        }
        if matches!(self.kind(), Kind::RankedCombination | Kind::Combination) && sorted != ts {
            return bad("combination treatments must be sorted".into());
        }
        match self {
            Question::RankedPermutation { lo, .. } | Question::RankedCombination { lo, .. } => {
                let (_, hi) = self.span().unwrap();
                if *lo < 1 || hi > n {
                    return bad(format!("rank span {lo}..{hi} outside 1..{n}"));
                }
            }
            Question::RankSet { ranks, .. } => {
                if ranks.is_empty() || ranks.len() >= n {
                    return bad("rank set must be a proper non-empty subset".into());
                }
                if ranks.windows(2).any(|w| w[0] >= w[1]) || ranks[0] < 1 || ranks[ranks.len() - 1] > n {
                    return bad("rank set must be sorted, distinct and within 1..n".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Stable text key: kind tag, treatment names, then span, MID or ranks.
    pub fn key(&self, labels: &[String]) -> String {
        let names = self
            .treatments()
            .iter()
            .map(|&t| labels[t].as_str())
            .collect::<Vec<_>>()
            .join(",");
        let tag = self.kind().tag();
        match self {
            Question::RankedPermutation { .. } | Question::RankedCombination { .. } => {
                let (lo, hi) = self.span().unwrap();
                format!("{tag}|{names}|{lo}-{hi}")
            }
            Question::PartialHierarchy { mid, .. } => format!("{tag}|{names}|mid={}", mid.value()),
            Question::RankSet { ranks, .. } => format!("{tag}|{names}|{}", join(ranks, ",")),
            _ => format!("{tag}|{names}"),
        }
    }

    /// Human-readable notation, e.g. `(A, B)_1^2`, `{C, D}_3^4`, `A > B > C`, `A_{1-3}`.
    pub fn display(&self, labels: &[String]) -> String {
        let names: Vec<&str> = self.treatments().iter().map(|&t| labels[t].as_str()).collect();
        match self {
            Question::RankedPermutation { .. } => {
                let (lo, hi) = self.span().unwrap();
                format!("({})_{lo}^{hi}", names.join(", "))
            }
            Question::Permutation { .. } => format!("({})", names.join(", ")),
            Question::RankedCombination { .. } => {
                let (lo, hi) = self.span().unwrap();
                format!("{{{}}}_{lo}^{hi}", names.join(", "))
            }
            Question::Combination { .. } => format!("{{{}}}", names.join(", ")),
            Question::PartialHierarchy { mid, .. } => {
                let chain = names.join(" > ");
                if mid.value() > 0.0 {
                    format!("{chain} (MID {})", mid.value())
                } else {
                    chain
                }
            }
            Question::RankSet { ranks, .. } => format!("{}_{{{}}}", names[0], rank_list(ranks)),
        }
    }
}

fn join(xs: &[usize], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

/// `1-3` for an interval, `1,4` otherwise.
fn rank_list(ranks: &[usize]) -> String {
    let contiguous = ranks.windows(2).all(|w| w[1] == w[0] + 1);
    if ranks.len() > 1 && contiguous {
        format!("{}-{}", ranks[0], ranks[ranks.len() - 1])
    } else {
        join(ranks, ",")
    }
}

fn missing_treatment(ts: &[usize], n: usize) -> usize {
    (0..n).find(|t| !ts.contains(t)).expect("one treatment is missing")
}

/// Maps equivalent questions onto one representative.
///
/// * A full-length ranked permutation, and the bottom-anchored one of length
///   n−1, become the top-anchored ranked permutation of length n−1.
/// * A bottom-anchored ranked combination `C_{j+1}^n` with `2 <= j <= n-2`
///   becomes its complement `C'_1^j`.
/// * Combination lists and rank sets are sorted.
pub fn canonicalize(q: &Question, n: usize) -> Result<Question> {
    let mut q = q.clone();
    match &mut q {
        Question::RankedCombination { treatments, .. } | Question::Combination { treatments } => {
            treatments.sort_unstable();
        }
        Question::RankSet { ranks, .. } => {
            ranks.sort_unstable();
            ranks.dedup();
        }
        _ => {}
    }
    q.validate(n)?;
    let canonical = match q {
        Question::RankedPermutation { mut treatments, lo } if n >= 3 => {
            if treatments.len() == n {
                treatments.truncate(n - 1);
                Question::RankedPermutation { treatments, lo: 1 }
            } else if treatments.len() == n - 1 && lo == 2 {
                let first = missing_treatment(&treatments, n);
                treatments.insert(0, first);
                treatments.truncate(n - 1);
                Question::RankedPermutation { treatments, lo: 1 }
            } else {
                Question::RankedPermutation { treatments, lo }
            }
        }
        Question::RankedCombination { treatments, lo }
            if lo + treatments.len() - 1 == n && (2..=n.saturating_sub(2)).contains(&(lo - 1)) =>
        {
            let complement: Vec<usize> = (0..n).filter(|t| !treatments.contains(t)).collect();
            Question::RankedCombination {
                treatments: complement,
                lo: 1,
            }
        }
        other => other,
    };
    Ok(canonical)
}

/// For the canonical form of a complete hierarchy (top-anchored ranked
/// permutation of length n−1) returns all n treatments in rank order.
/// Other ranked permutations come back unchanged. `None` for other kinds.
pub fn expanded_ranked_permutation(q: &Question, n: usize) -> Option<(Vec<usize>, usize)> {
    match q {
        Question::RankedPermutation { treatments, lo } => {
            if n >= 3 && *lo == 1 && treatments.len() == n - 1 {
                let mut full = treatments.clone();
                full.push(missing_treatment(treatments, n));
                Some((full, 1))
            } else {
                Some((treatments.clone(), *lo))
            }
        }
        _ => None,
    }
}

/// Number of distinct questions of each kind in a network of n treatments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuestionCount {
    pub n: usize,
    pub ranked_permutations: u128,
    pub permutations: u128,
    pub partial_hierarchies: u128,
    pub ranked_combinations: u128,
    pub combinations: u128,
    pub rank_sets: u128,
    pub total: u128,
}

impl QuestionCount {
    pub fn get(&self, kind: Kind) -> u128 {
        match kind {
            Kind::RankedPermutation => self.ranked_permutations,
            Kind::Permutation => self.permutations,
            Kind::PartialHierarchy => self.partial_hierarchies,
            Kind::RankedCombination => self.ranked_combinations,
            Kind::Combination => self.combinations,
            Kind::RankSet => self.rank_sets,
        }
    }

    pub fn log10_total(&self) -> f64 {
        (self.total as f64).log10()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 treatments, got {n}")));
    }
    Ok(())
}

/// n! / (n−s)!
fn falling(n: usize, s: usize) -> Result<u128> {
    ((n - s + 1)..=n).try_fold(1u128, |acc, f| acc.checked_mul(f as u128).ok_or(Error::Overflow(n)))
}

fn binomial(n: usize, s: usize) -> Result<u128> {
    let s = s.min(n - s);
    (0..s).try_fold(1u128, |acc, i| {
        acc.checked_mul((n - i) as u128)
            .map(|v| v / (i as u128 + 1))
            .ok_or(Error::Overflow(n))
    })
}

fn pow2(n: usize) -> Result<u128> {
    1u128.checked_shl(n as u32).filter(|_| n < 128).ok_or(Error::Overflow(n))
}

fn sum(terms: impl IntoIterator<Item = Result<u128>>, n: usize) -> Result<u128> {
    terms
        .into_iter()
        .try_fold(0u128, |acc, t| acc.checked_add(t?).ok_or(Error::Overflow(n)))
}

/// Σ_{s=2}^{n−2} n!/(n−s)!·(n−s+1) + n!
pub fn count_ranked_permutations(n: usize) -> Result<u128> {
    check_n(n)?;
    let partial = sum(
        (2..=n.saturating_sub(2)).map(|s| {
            falling(n, s)?
                .checked_mul((n - s + 1) as u128)
                .ok_or(Error::Overflow(n))
        }),
        n,
    )?;
    partial.checked_add(falling(n, n)?).ok_or(Error::Overflow(n))
}

/// Σ_{s=2}^{n−1} n!/(n−s)!
pub fn count_permutations(n: usize) -> Result<u128> {
    check_n(n)?;
    sum((2..n).map(|s| falling(n, s)), n)
}

/// C(n,2) + Σ_{s=3}^{n−1} n!/(n−s)!. Zero for n = 2, where no size in 2..n−1 exists.
pub fn count_partial_hierarchies(n: usize) -> Result<u128> {
    check_n(n)?;
    if n == 2 {
        return Ok(0);
    }
    let rest = sum((3..n).map(|s| falling(n, s)), n)?;
    binomial(n, 2)?.checked_add(rest).ok_or(Error::Overflow(n))
}

/// n(2^{n−1} − n + 1). Zero for n = 2, where no size in 2..n−1 exists.
pub fn count_ranked_combinations(n: usize) -> Result<u128> {
    check_n(n)?;
    if n == 2 {
        return Ok(0);
    }
    (pow2(n - 1)? - n as u128 + 1)
        .checked_mul(n as u128)
        .ok_or(Error::Overflow(n))
}

/// 2^n − n − 2
pub fn count_combinations(n: usize) -> Result<u128> {
    check_n(n)?;
    Ok(pow2(n)? - n as u128 - 2)
}

/// n(2^n − 2)
pub fn count_rank_sets(n: usize) -> Result<u128> {
    check_n(n)?;
    (pow2(n)? - 2).checked_mul(n as u128).ok_or(Error::Overflow(n))
}

pub fn count_total(n: usize) -> Result<QuestionCount> {
    let ranked_permutations = count_ranked_permutations(n)?;
    let permutations = count_permutations(n)?;
    let partial_hierarchies = count_partial_hierarchies(n)?;
    let ranked_combinations = count_ranked_combinations(n)?;
    let combinations = count_combinations(n)?;
    let rank_sets = count_rank_sets(n)?;
    let total = sum(
        [
            ranked_permutations,
            permutations,
            partial_hierarchies,
            ranked_combinations,
            combinations,
            rank_sets,
        ]
        .map(Ok),
        n,
    )?;
    Ok(QuestionCount {
        n,
        ranked_permutations,
        permutations,
        partial_hierarchies,
        ranked_combinations,
        combinations,
        rank_sets,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        crate::ingest::default_labels(n)
    }

    #[test]
    fn counts_for_five_treatments() {
        let c = count_total(5).unwrap();
        assert_eq!(
            [
                c.ranked_permutations,
                c.permutations,
                c.partial_hierarchies,
                c.ranked_combinations,
                c.combinations,
                c.rank_sets
            ],
            [380, 200, 190, 60, 25, 150]
        );
        assert_eq!(c.total, 1005);
    }

    #[test]
    fn counts_for_nine_treatments() {
        assert_eq!(count_ranked_permutations(9).unwrap(), 1_246_968);
        assert_eq!(count_ranked_combinations(9).unwrap(), 2232);
        assert_eq!(count_combinations(9).unwrap(), 501);
        assert_eq!(count_rank_sets(9).unwrap(), 4590);
        let c = count_total(9).unwrap();
        assert!(c.total > 1_000_000);
        assert!((c.log10_total() - 6.4).abs() < 0.05, "{}", c.log10_total());
    }

    #[test]
    fn small_networks() {
        assert_eq!(count_ranked_permutations(2).unwrap(), 2);
        assert_eq!(count_permutations(2).unwrap(), 0);
        assert_eq!(count_permutations(3).unwrap(), 6);
        assert_eq!(count_partial_hierarchies(3).unwrap(), 3);
        assert_eq!(count_combinations(2).unwrap(), 0);
        assert_eq!(count_rank_sets(2).unwrap(), 4);
        assert!(count_total(1).is_err());
    }

    #[test]
    fn total_grows_with_n() {
        let totals: Vec<u128> = (2..=30).map(|n| count_total(n).unwrap().total).collect();
        assert!(totals.windows(2).all(|w| w[0] < w[1]));
        assert!(count_total(200).is_err());
    }

    #[test]
    fn full_hierarchy_collapses_to_length_n_minus_1() {
        let q = Question::RankedPermutation {
            treatments: vec![0, 1, 2, 3, 4],
            lo: 1,
        };
        let c = canonicalize(&q, 5).unwrap();
        assert_eq!(c.display(&labels(5)), "(A, B, C, D)_1^4");
        let bottom = Question::RankedPermutation {
            treatments: vec![1, 2, 3, 4],
            lo: 2,
        };
        assert_eq!(canonicalize(&bottom, 5).unwrap(), c);
        assert_eq!(expanded_ranked_permutation(&c, 5).unwrap().0, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn bottom_block_becomes_top_complement() {
        let q = Question::RankedCombination {
            treatments: vec![3, 4, 5],
            lo: 4,
        };
        let c = canonicalize(&q, 6).unwrap();
        assert_eq!(c.display(&labels(6)), "{A, B, C}_1^3");
        // size n-1 bottom blocks are equivalent to a single rank, not a combination
        let q = Question::RankedCombination {
            treatments: vec![1, 2, 3, 4],
            lo: 2,
        };
        assert_eq!(canonicalize(&q, 5).unwrap(), q);
    }

    #[test]
    fn canonical_is_idempotent() {
        let q = Question::RankedPermutation {
            treatments: vec![0, 1],
            lo: 1,
        };
        assert_eq!(canonicalize(&q, 5).unwrap(), q);
        let two = Question::RankedPermutation {
            treatments: vec![1, 0],
            lo: 1,
        };
        assert_eq!(canonicalize(&two, 2).unwrap(), two);
    }

    #[test]
    fn validation_rejects_malformed() {
        let bad = [
            Question::Permutation {
                treatments: vec![0, 0],
            },
            Question::Combination {
                treatments: vec![2, 1],
            },
            Question::RankedPermutation {
                treatments: vec![0, 1],
                lo: 5,
            },
            Question::RankSet {
                treatment: 0,
                ranks: vec![1, 2, 3, 4, 5],
            },
            Question::Permutation {
                treatments: vec![0, 1, 2, 3, 4],
            },
        ];
        for q in bad {
            assert!(q.validate(5).is_err(), "{q:?}");
        }
    }

    #[test]
    fn keys_and_notation() {
        let l = labels(5);
        let q = Question::RankSet {
            treatment: 0,
            ranks: vec![1, 4],
        };
        assert_eq!(q.display(&l), "A_{1,4}");
        assert_eq!(q.key(&l), "RS|A|1,4");
        let q = Question::PartialHierarchy {
            chain: vec![0, 1, 2],
            mid: Mid::new(0.1).unwrap(),
        };
        assert_eq!(q.key(&l), "PH|A,B,C|mid=0.1");
        assert_eq!(Mid::new(-0.0).unwrap(), Mid::ZERO);
        assert!(Mid::new(-1.0).is_err());
    }
}
