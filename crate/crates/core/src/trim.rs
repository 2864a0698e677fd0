//! Redundancy trimming.
//!
//! Every pass reads the untrimmed catalog and emits marks. Marks are merged
//! and sorted before any entry is flagged, so pass order never matters.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::catalog::CredibleCatalog;
use crate::error::Result;
use crate::ingest::Samples;
use crate::taxonomy::{canonicalize, expanded_ranked_permutation, Mid, Question};

/// One row of the redundancy table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
    R11,
    R12a,
    R12b,
    R13,
    R14,
    R15,
    R16,
    R17,
    R18,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::R1 => "1",
            Rule::R2 => "2",
            Rule::R3 => "3",
            Rule::R4 => "4",
            Rule::R5 => "5",
            Rule::R6 => "6",
            Rule::R7 => "7",
            Rule::R8 => "8",
            Rule::R9 => "9",
            Rule::R10 => "10",
            Rule::R11 => "11",
            Rule::R12a => "12a",
            Rule::R12b => "12b",
            Rule::R13 => "13",
            Rule::R14 => "14",
            Rule::R15 => "15",
            Rule::R16 => "16",
            Rule::R17 => "17",
            Rule::R18 => "18",
        }
    }

    pub fn number(self) -> u8 {
        self.id().trim_end_matches(['a', 'b']).parse().expect("numeric id")
    }

    /// Rules whose witnesses imply the target only jointly.
    pub fn is_conditional(self) -> bool {
        self.number() >= 14
    }

    pub fn description(self) -> &'static str {
        match self {
            Rule::R1 => "shorter window of a ranked permutation",
            Rule::R2 => "shorter window of a permutation",
            Rule::R3 => "sub-chain of a partial hierarchy",
            Rule::R4 => "permutation implies its MID-0 chain",
            Rule::R5 => "ranked permutation implies its permutation",
            Rule::R6 => "ranked combination implies its combination",
            Rule::R7 => "permutation implies its combination",
            Rule::R8 => "ranked permutation implies its ranked combination",
            Rule::R9 => "ranked permutation implies single-rank sets",
            Rule::R10 => "ranked combination implies its rank intervals",
            Rule::R11 => "bottom block equals its top complement",
            Rule::R12a => "block below rank 1 equals the top treatment",
            Rule::R12b => "block above rank n equals the bottom treatment",
            Rule::R13 => "complete hierarchy implies the last rank",
            Rule::R14 => "middle block between two single-rank tails",
            Rule::R15 => "middle block between a single-rank tail and a ranked permutation",
            Rule::R16 => "middle block between two ranked permutations",
            Rule::R17 => "block split into a ranked permutation and a smaller block",
            Rule::R18 => "block split into a single rank and a smaller block",
        }
    }
}

/// How two witnesses were shown to be jointly credible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointEvidence {
    pub p1: f64,
    pub p2: f64,
    pub bound: f64,
    /// Exact joint support, computed only when the bound fell short.
    pub exact: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mark {
    /// Catalog index of the redundant entry.
    pub target: usize,
    pub rule: Rule,
    /// Catalog indices of the entries implying it.
    pub witnesses: Vec<usize>,
    pub joint: Option<JointEvidence>,
    /// Whether the retention policy let this mark trim its target.
    pub applied: bool,
}

/// Why an entry was trimmed, in terms of questions rather than indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TrimReason {
    pub rule: Rule,
    pub witnesses: Vec<Question>,
    pub joint: Option<JointEvidence>,
}

/// Every mark found, applied or not, in (target, rule, witnesses) order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrimReport {
    pub marks: Vec<Mark>,
}

impl TrimReport {
    pub fn applied(&self) -> impl Iterator<Item = &Mark> {
        self.marks.iter().filter(|m| m.applied)
    }

    pub fn for_rule(&self, rule: Rule) -> impl Iterator<Item = &Mark> {
        self.marks.iter().filter(move |m| m.rule == rule)
    }
}

/// `max(p1 + p2 − 1, 0)`, the least possible probability of both events.
pub fn joint_lower_bound(p1: f64, p2: f64) -> f64 {
    (p1 + p2 - 1.0).max(0.0)
}

/// Whether `q` holds in sample `row`.
pub(crate) fn holds(samples: &Samples, q: &Question, row: usize) -> bool {
    let rm = samples.ranks();
    let order = rm.row(row);
    match q {
        Question::RankedPermutation { treatments, lo } => {
            order[lo - 1..lo - 1 + treatments.len()] == treatments[..]
        }
        Question::Permutation { treatments } => {
            let start = rm.rank(row, treatments[0]) - 1;
            let end = start + treatments.len();
            end <= order.len() && order[start..end] == treatments[..]
        }
        Question::RankedCombination { treatments, lo } => order[lo - 1..lo - 1 + treatments.len()]
            .iter()
            .all(|t| treatments.binary_search(t).is_ok()),
        Question::Combination { treatments } => {
            let start = treatments.iter().map(|&t| rm.rank(row, t)).min().expect("non-empty") - 1;
            let end = start + treatments.len();
            end <= order.len() && order[start..end].iter().all(|t| treatments.binary_search(t).is_ok())
        }
        Question::PartialHierarchy { chain, mid } => samples.chain_holds(row, chain, *mid),
        Question::RankSet { treatment, ranks } => ranks.binary_search(&rm.rank(row, *treatment)).is_ok(),
    }
}

fn check_all(samples: &Samples, qs: &[Question]) -> Result<()> {
    for q in qs {
        q.validate(samples.n())?;
        if let Some(mid) = q.mid() {
            samples.check_mid(mid)?;
        }
    }
    Ok(())
}

/// Samples in which every question of `qs` holds at once.
pub fn joint_count(samples: &Samples, qs: &[Question]) -> Result<u64> {
    check_all(samples, qs)?;
    Ok((0..samples.k())
        .filter(|&r| qs.iter().all(|q| holds(samples, q, r)))
        .count() as u64)
}

/// Fraction of samples in which every question of `qs` holds at once.
pub fn joint_empirical(samples: &Samples, qs: &[Question]) -> Result<f64> {
    Ok(joint_count(samples, qs)? as f64 / samples.k() as f64)
}

struct Marker<'a> {
    catalog: &'a CredibleCatalog,
    index: HashMap<&'a Question, usize>,
    marks: Vec<Mark>,
}

impl<'a> Marker<'a> {
    fn new(catalog: &'a CredibleCatalog) -> Self {
        Marker {
            catalog,
            index: catalog.index(),
            marks: Vec::new(),
        }
    }

    fn n(&self) -> usize {
        self.catalog.n
    }

    fn find(&self, q: &Question) -> Option<usize> {
        self.index.get(q).copied()
    }

    fn entries(&self) -> impl Iterator<Item = (usize, &'a Question)> + 'a {
        self.catalog.entries.iter().enumerate().map(|(i, e)| (i, &e.question))
    }

    /// Marks `target` by `witness` if the target is in the catalog.
    fn mark(&mut self, target: &Question, rule: Rule, witness: usize) {
        if let Some(t) = self.find(target) {
            if t != witness {
                self.marks.push(Mark {
                    target: t,
                    rule,
                    witnesses: vec![witness],
                    joint: None,
                    applied: false,
                });
            }
        }
    }

    fn is_full(&self, q: &Question) -> bool {
        let n = self.n();
        matches!(q, Question::RankedPermutation { treatments, lo: 1 } if n >= 3 && treatments.len() == n - 1)
    }

    fn complement(&self, ts: &[usize]) -> Vec<usize> {
        (0..self.n()).filter(|t| !ts.contains(t)).collect()
    }
}

fn sorted(ts: &[usize]) -> Vec<usize> {
    let mut v = ts.to_vec();
    v.sort_unstable();
    v
}

fn finish(mut marks: Vec<Mark>) -> Vec<Mark> {
    marks.sort_by(|a, b| {
        (a.target, a.rule, &a.witnesses).cmp(&(b.target, b.rule, &b.witnesses))
    });
    marks.dedup_by(|a, b| a.target == b.target && a.rule == b.rule && a.witnesses == b.witnesses);
    marks
}

/// Rows 1–8: a question implied by a more detailed one, within or across kinds.
pub fn mark_superset_redundancies(c: &CredibleCatalog) -> Vec<Mark> {
    let mut m = Marker::new(c);
    let n = m.n();
    for (w, q) in m.entries().collect::<Vec<_>>() {
        match q {
            Question::RankedPermutation { .. } => {
                let (seq, lo) = expanded_ranked_permutation(q, n).expect("ranked permutation");
                let len = seq.len();
                for a in 0..len {
                    for b in a + 2..=len {
                        if b - a == len {
                            continue;
                        }
                        let sub = Question::RankedPermutation {
                            treatments: seq[a..b].to_vec(),
                            lo: lo + a,
                        };
                        if let Ok(sub) = canonicalize(&sub, n) {
                            m.mark(&sub, Rule::R1, w);
                        }
                    }
                }
                let blocks: Vec<(&[usize], usize)> = if m.is_full(q) {
                    vec![(&seq[..n - 1], 1), (&seq[1..], 2)]
                } else {
                    vec![(&seq[..], lo)]
                };
                for (block, lo) in blocks {
                    m.mark(&Question::Permutation { treatments: block.to_vec() }, Rule::R5, w);
                    m.mark(
                        &Question::RankedCombination {
                            treatments: sorted(block),
                            lo,
                        },
                        Rule::R8,
                        w,
                    );
                }
            }
            Question::Permutation { treatments } => {
                let len = treatments.len();
                for a in 0..len {
                    for b in a + 2..=len {
                        if b - a < len {
                            m.mark(
                                &Question::Permutation {
                                    treatments: treatments[a..b].to_vec(),
                                },
                                Rule::R2,
                                w,
                            );
                        }
                    }
                }
                m.mark(
                    &Question::PartialHierarchy {
                        chain: treatments.clone(),
                        mid: Mid::ZERO,
                    },
                    Rule::R4,
                    w,
                );
                m.mark(&Question::Combination { treatments: sorted(treatments) }, Rule::R7, w);
            }
            Question::PartialHierarchy { chain, mid } if chain.len() >= 3 => {
                // immediate sub-chains suffice: shorter ones are marked by these in turn
                for skip in 0..chain.len() {
                    let mut sub = chain.clone();
                    sub.remove(skip);
                    m.mark(&Question::PartialHierarchy { chain: sub, mid: *mid }, Rule::R3, w);
                }
            }
            Question::RankedCombination { treatments, lo } => {
                m.mark(&Question::Combination { treatments: treatments.clone() }, Rule::R6, w);
                let hi = lo + treatments.len() - 1;
                if *lo == 1 || hi == n {
                    let comp = m.complement(treatments);
                    if comp.len() >= 2 {
                        m.mark(&Question::Combination { treatments: comp }, Rule::R6, w);
                    }
                }
            }
            _ => {}
        }
    }
    finish(m.marks)
}

/// Rows 9–10: rank sets implied by ranked arrangements.
pub fn mark_hdr_implications(c: &CredibleCatalog) -> Vec<Mark> {
    let mut m = Marker::new(c);
    for (w, q) in m.entries().collect::<Vec<_>>() {
        match q {
            Question::RankedPermutation { treatments, lo } => {
                for (i, &t) in treatments.iter().enumerate() {
                    m.mark(
                        &Question::RankSet {
                            treatment: t,
                            ranks: vec![lo + i],
                        },
                        Rule::R9,
                        w,
                    );
                }
            }
            Question::RankedCombination { treatments, lo } => {
                let ranks: Vec<usize> = (*lo..lo + treatments.len()).collect();
                for &t in treatments {
                    m.mark(
                        &Question::RankSet {
                            treatment: t,
                            ranks: ranks.clone(),
                        },
                        Rule::R10,
                        w,
                    );
                }
            }
            _ => {}
        }
    }
    finish(m.marks)
}

/// A block anchored at rank 1 or rank n, as a tail of a partition.
struct Tail {
    entry: usize,
    treatments: Vec<usize>,
    single_rank: bool,
}

fn joint_evidence(
    c: &CredibleCatalog,
    samples: &Samples,
    a: usize,
    b: usize,
) -> Result<Option<JointEvidence>> {
    let (ea, eb) = (&c.entries[a], &c.entries[b]);
    let p1 = c.pi_hat(ea);
    let p2 = c.pi_hat(eb);
    let bound = joint_lower_bound(p1, p2);
    if bound > 0.0 && c.threshold.admits_probability(bound) {
        return Ok(Some(JointEvidence {
            p1,
            p2,
            bound,
            exact: None,
        }));
    }
    let count = joint_count(samples, &[ea.question.clone(), eb.question.clone()])?;
    Ok(c.threshold.admits(count, c.k).then_some(JointEvidence {
        p1,
        p2,
        bound,
        exact: Some(count),
    }))
}

/// Rows 11–18: equivalences and implications between blocks of a partition
/// of the ranks. Rows 14–18 need the witnesses to be jointly credible, which
/// is settled by [`joint_lower_bound`] when possible and by the samples otherwise.
pub fn mark_partition_blocks(c: &CredibleCatalog, samples: &Samples) -> Result<Vec<Mark>> {
    let mut m = Marker::new(c);
    let n = m.n();
    let mut tops = Vec::new();
    let mut bottoms = Vec::new();
    let mut single: HashMap<(usize, usize), usize> = HashMap::new();
    let mut windows = Vec::new();

    for (w, q) in m.entries().collect::<Vec<_>>() {
        match q {
            Question::RankedCombination { treatments, lo: 1 } if n - treatments.len() >= 2 => {
                let comp = m.complement(treatments);
                let lo = treatments.len() + 1;
                m.mark(&Question::RankedCombination { treatments: comp, lo }, Rule::R11, w);
            }
            Question::RankSet { treatment, ranks } if ranks.len() == 1 => {
                let r = ranks[0];
                single.insert((*treatment, r), w);
                let rest = m.complement(&[*treatment]);
                if r == 1 && n >= 3 {
                    m.mark(&Question::RankedCombination { treatments: rest, lo: 2 }, Rule::R12a, w);
                    tops.push(Tail {
                        entry: w,
                        treatments: vec![*treatment],
                        single_rank: true,
                    });
                } else if r == n && n >= 3 {
                    m.mark(&Question::RankedCombination { treatments: rest, lo: 1 }, Rule::R12b, w);
                    bottoms.push(Tail {
                        entry: w,
                        treatments: vec![*treatment],
                        single_rank: true,
                    });
                }
            }
            Question::RankedPermutation { treatments, lo } => {
                if m.is_full(q) {
                    let missing = m.complement(treatments)[0];
                    m.mark(
                        &Question::RankSet {
                            treatment: missing,
                            ranks: vec![n],
                        },
                        Rule::R13,
                        w,
                    );
                    continue;
                }
                let hi = lo + treatments.len() - 1;
                windows.push((w, treatments.clone(), *lo, hi));
                let tail = Tail {
                    entry: w,
                    treatments: treatments.clone(),
                    single_rank: false,
                };
                if *lo == 1 {
                    tops.push(tail);
                } else if hi == n {
                    bottoms.push(tail);
                }
            }
            _ => {}
        }
    }

    // rules 14–16
    for top in &tops {
        for bottom in &bottoms {
            let i = top.treatments.len();
            let j = n - bottom.treatments.len() + 1;
            if j < i + 3 || top.treatments.iter().any(|t| bottom.treatments.contains(t)) {
                continue;
            }
            let middle: Vec<usize> = (0..n)
                .filter(|t| !top.treatments.contains(t) && !bottom.treatments.contains(t))
                .collect();
            let target = Question::RankedCombination {
                treatments: middle,
                lo: i + 1,
            };
            let Some(t) = m.find(&target) else { continue };
            let rule = match (top.single_rank, bottom.single_rank) {
                (true, true) => Rule::R14,
                (false, false) => Rule::R16,
                _ => Rule::R15,
            };
            if let Some(joint) = joint_evidence(c, samples, top.entry, bottom.entry)? {
                m.marks.push(Mark {
                    target: t,
                    rule,
                    witnesses: vec![top.entry, bottom.entry],
                    joint: Some(joint),
                    applied: false,
                });
            }
        }
    }

    // rules 17–18
    for (t, q) in m.entries().collect::<Vec<_>>() {
        let Question::RankedCombination { treatments: set, lo } = q else { continue };
        let (i, j) = (*lo, lo + set.len() - 1);
        if set.len() < 3 {
            continue;
        }
        let rest_of = |piece: &[usize]| -> Vec<usize> {
            set.iter().copied().filter(|x| !piece.contains(x)).collect()
        };
        let mut splits: Vec<(Rule, usize, Question)> = Vec::new();
        for (w, ts, wlo, whi) in &windows {
            if !ts.iter().all(|x| set.binary_search(x).is_ok()) {
                continue;
            }
            if *wlo == i && whi + 2 <= j {
                splits.push((Rule::R17, *w, Question::RankedCombination { treatments: rest_of(ts), lo: whi + 1 }));
            }
            if *whi == j && *wlo >= i + 2 {
                splits.push((Rule::R17, *w, Question::RankedCombination { treatments: rest_of(ts), lo: i }));
            }
        }
        for &x in set {
            if let Some(&w) = single.get(&(x, i)) {
                splits.push((Rule::R18, w, Question::RankedCombination { treatments: rest_of(&[x]), lo: i + 1 }));
            }
            if let Some(&w) = single.get(&(x, j)) {
                splits.push((Rule::R18, w, Question::RankedCombination { treatments: rest_of(&[x]), lo: i }));
            }
        }
        for (rule, w, piece) in splits {
            let Some(p) = m.find(&piece) else { continue };
            if let Some(joint) = joint_evidence(c, samples, w, p)? {
                m.marks.push(Mark {
                    target: t,
                    rule,
                    witnesses: vec![w, p],
                    joint: Some(joint),
                    applied: false,
                });
            }
        }
    }
    Ok(finish(m.marks))
}

/// Flags entries from a full set of marks.
///
/// Unconditional marks (rules 1–13) always trim. A conditional mark (rules
/// 14–18) trims only when each of its witnesses survives: not trimmed by an
/// unconditional mark, and not itself the target of a conditional mark whose
/// witnesses survive the unconditional marks.
pub fn apply_marks(c: &CredibleCatalog, marks: Vec<Mark>) -> (CredibleCatalog, TrimReport) {
    let mut marks = finish(marks);
    let size = c.len();
    let mut plain = vec![false; size];
    for mk in marks.iter().filter(|mk| !mk.rule.is_conditional()) {
        plain[mk.target] = true;
    }
    let mut contested = vec![false; size];
    for mk in marks.iter().filter(|mk| mk.rule.is_conditional()) {
        if !plain[mk.target] && mk.witnesses.iter().all(|&w| !plain[w]) {
            contested[mk.target] = true;
        }
    }
    let mut out = c.clone();
    for e in &mut out.entries {
        e.redundant = false;
        e.trimmed_by.clear();
    }
    for mk in &mut marks {
        mk.applied = !mk.rule.is_conditional()
            || mk.witnesses.iter().all(|&w| !plain[w] && !contested[w]);
        if mk.applied {
            let entry = &mut out.entries[mk.target];
            entry.redundant = true;
            entry.trimmed_by.push(TrimReason {
                rule: mk.rule,
                witnesses: mk.witnesses.iter().map(|&w| c.entries[w].question.clone()).collect(),
                joint: mk.joint,
            });
        }
    }
    (out, TrimReport { marks })
}

/// Runs every pass over the untrimmed catalog, then applies the retention policy.
pub fn trim_all(c: &CredibleCatalog, samples: &Samples) -> Result<(CredibleCatalog, TrimReport)> {
    let mut marks = mark_superset_redundancies(c);
    marks.extend(mark_hdr_implications(c));
    marks.extend(mark_partition_blocks(c, samples)?);
    Ok(apply_marks(c, marks))
}

/// Marks contradicted by the samples: some sample satisfies every witness
/// but not the target. Empty for a sound set of marks.
pub fn unsound_marks<'m>(c: &CredibleCatalog, marks: &'m [Mark], samples: &Samples) -> Vec<&'m Mark> {
    marks
        .iter()
        .filter(|mk| {
            let target = &c.entries[mk.target].question;
            (0..samples.k()).any(|r| {
                mk.witnesses.iter().all(|&w| holds(samples, &c.entries[w].question, r))
                    && !holds(samples, target, r)
            })
        })
        .collect()
}

/// Entries that are redundant but cannot be traced through applied marks to
/// retained entries. Empty when trimming lost nothing.
pub fn underivable_entries(c: &CredibleCatalog, report: &TrimReport) -> Vec<usize> {
    let mut derivable: BTreeSet<usize> = (0..c.len()).filter(|&i| !c.entries[i].redundant).collect();
    loop {
        let before = derivable.len();
        for mk in report.applied() {
            if mk.witnesses.iter().all(|w| derivable.contains(w)) {
                derivable.insert(mk.target);
            }
        }
        if derivable.len() == before {
            break;
        }
    }
    (0..c.len()).filter(|i| !derivable.contains(i)).collect()
}
