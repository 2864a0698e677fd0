//! Serializable views of a catalog, its trim report and rankograms.

use serde::Serialize;

use crate::catalog::{CatalogEntry, CredibleCatalog, Sensitivity, StageTimings};
use crate::hdr::{HdrSet, RankDistribution};
use crate::taxonomy::{Kind, Question};
use crate::trim::{JointEvidence, TrimReport};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// File path, or a description of the simulated instance.
    pub input: String,
    pub n: usize,
    pub k: usize,
    pub labels: Vec<String>,
    pub tau: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_star: Option<f64>,
    pub float_guard: f64,
    pub mid: f64,
    pub direction: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub trim: bool,
    /// Seconds per stage. Left out unless requested, so output stays reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingsJson>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimingsJson {
    pub arrangements: f64,
    pub partial: f64,
    pub hdr: f64,
    pub trim: f64,
    pub total: f64,
}

impl From<StageTimings> for TimingsJson {
    fn from(t: StageTimings) -> Self {
        TimingsJson {
            arrangements: t.arrangements.as_secs_f64(),
            partial: t.partial.as_secs_f64(),
            hdr: t.hdr.as_secs_f64(),
            trim: t.trim.as_secs_f64(),
            total: t.total().as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointJson {
    pub p1: f64,
    pub p2: f64,
    pub bound: f64,
    /// "bound" when the bound alone clears τ, "exact" otherwise.
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

impl From<JointEvidence> for JointJson {
    fn from(j: JointEvidence) -> Self {
        JointJson {
            p1: j.p1,
            p2: j.p2,
            bound: j.bound,
            method: if j.exact.is_some() { "exact" } else { "bound" },
            count: j.exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrimReasonJson {
    pub rule: &'static str,
    pub witness: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryJson {
    pub kind: Kind,
    pub key: String,
    pub display: String,
    pub treatments: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_lo: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_hi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mid: Option<f64>,
    pub count: u64,
    pub k: usize,
    pub pi_hat: f64,
    pub redundant: bool,
    pub trimmed_by: Vec<TrimReasonJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkJson {
    pub target: String,
    pub rule: &'static str,
    pub description: &'static str,
    pub witness: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointJson>,
    pub applied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityJson {
    pub tau_star: f64,
    /// Entries credible at τ* but not at τ.
    pub added: Vec<EntryJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogJson {
    pub manifest: RunManifest,
    pub entries: Vec<EntryJson>,
    pub trim_report: Vec<MarkJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sensitivity: Option<SensitivityJson>,
}

fn names(labels: &[String], ts: &[usize]) -> Vec<String> {
    ts.iter().map(|&t| labels[t].clone()).collect()
}

pub fn entry_json(c: &CredibleCatalog, e: &CatalogEntry) -> EntryJson {
    let labels = &c.labels;
    let q = &e.question;
    let span = q.span();
    EntryJson {
        kind: q.kind(),
        key: q.key(labels),
        display: q.display(labels),
        treatments: names(labels, q.treatments()),
        rank_lo: span.map(|s| s.0),
        rank_hi: span.map(|s| s.1),
        ranks: q.ranks().map(<[usize]>::to_vec),
        mid: q.mid().map(|m| m.value()),
        count: e.count,
        k: c.k,
        pi_hat: c.pi_hat(e),
        redundant: e.redundant,
        trimmed_by: e
            .trimmed_by
            .iter()
            .map(|r| TrimReasonJson {
                rule: r.rule.id(),
                witness: r.witnesses.iter().map(|w: &Question| w.key(labels)).collect(),
                joint: r.joint.map(JointJson::from),
            })
            .collect(),
    }
}

pub fn catalog_json(
    manifest: RunManifest,
    c: &CredibleCatalog,
    report: Option<&TrimReport>,
    sensitivity: Option<&Sensitivity>,
) -> CatalogJson {
    let key = |i: usize| c.entries[i].question.key(&c.labels);
    let trim_report = report
        .map(|r| {
            r.marks
                .iter()
                .map(|m| MarkJson {
                    target: key(m.target),
                    rule: m.rule.id(),
                    description: m.rule.description(),
                    witness: m.witnesses.iter().map(|&w| key(w)).collect(),
                    joint: m.joint.map(JointJson::from),
                    applied: m.applied,
                })
                .collect()
        })
        .unwrap_or_default();
    CatalogJson {
        manifest,
        entries: c.entries.iter().map(|e| entry_json(c, e)).collect(),
        trim_report,
        sensitivity: sensitivity.map(|s| SensitivityJson {
            tau_star: s.tau_star,
            added: s
                .added
                .iter()
                .map(|&i| entry_json(&s.catalog, &s.catalog.entries[i]))
                .collect(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankogramJson {
    pub treatment: String,
    pub counts: Vec<u64>,
    pub probabilities: Vec<f64>,
    /// Highest-density region at τ, one-based ranks.
    pub hdr: Vec<usize>,
    pub hdr_pi_hat: f64,
}

pub fn rankograms_json(labels: &[String], dists: &[RankDistribution], hdrs: &[HdrSet]) -> Vec<RankogramJson> {
    dists
        .iter()
        .zip(hdrs)
        .map(|(d, h)| RankogramJson {
            treatment: labels[d.treatment].clone(),
            counts: d.counts.clone(),
            probabilities: d.probabilities(),
            hdr: h.ranks.clone(),
            hdr_pi_hat: h.pi_hat(),
        })
        .collect()
}

/// `treatment,rank,count,probability,in_hdr` rows for plotting.
pub fn rankograms_csv(labels: &[String], dists: &[RankDistribution], hdrs: &[HdrSet]) -> String {
    let mut out = String::from("treatment,rank,count,probability,in_hdr\n");
    for (d, h) in dists.iter().zip(hdrs) {
        for (r, (&c, p)) in d.counts.iter().zip(d.probabilities()).enumerate() {
            let in_hdr = h.ranks.contains(&(r + 1));
            out.push_str(&format!("{},{},{},{},{}\n", labels[d.treatment], r + 1, c, p, in_hdr));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::credible_catalog;
    use crate::ingest::{default_labels, RankMatrix, Samples, Threshold};
    use crate::taxonomy::Mid;

    #[test]
    fn entry_fields_follow_the_kind() {
        let rm = RankMatrix::from_orders(default_labels(3), vec![vec![0, 1, 2]; 4]).unwrap();
        let s = Samples::from_ranks(rm);
        let c = credible_catalog(&s, &Threshold::new(0.9).unwrap(), Mid::ZERO).unwrap();
        let json: Vec<EntryJson> = c.entries.iter().map(|e| entry_json(&c, e)).collect();
        let rp = &json[0];
        assert_eq!(rp.kind, Kind::RankedPermutation);
        assert_eq!((rp.rank_lo, rp.rank_hi, rp.pi_hat), (Some(1), Some(2), 1.0));
        assert!(json.iter().filter(|e| e.kind == Kind::RankSet).all(|e| e.ranks.is_some()));
        let text = serde_json::to_string(&json[0]).unwrap();
        assert!(!text.contains("\"mid\""), "{text}");
    }
}
