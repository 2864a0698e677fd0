//! Table and CSV views of a catalog.

use credhier::catalog::{CatalogEntry, CredibleCatalog, Sensitivity};
use credhier::taxonomy::{Kind, QuestionCount};

use crate::Failure;

fn rules(e: &CatalogEntry) -> String {
    let mut ids: Vec<&str> = e.trimmed_by.iter().map(|r| r.rule.id()).collect();
    ids.dedup();
    ids.join(" ")
}

/// Entries grouped by kind, most credible first within each group.
fn grouped(c: &CredibleCatalog) -> Vec<&CatalogEntry> {
    let mut v: Vec<&CatalogEntry> = c.entries.iter().collect();
    v.sort_by(|a, b| {
        a.question
            .kind()
            .report_order()
            .cmp(&b.question.kind().report_order())
            .then(b.count.cmp(&a.count))
            .then_with(|| a.question.cmp(&b.question))
    });
    v
}

fn rows(c: &CredibleCatalog, entries: &[&CatalogEntry]) -> String {
    let shown: Vec<String> = entries.iter().map(|e| e.question.display(&c.labels)).collect();
    let width = shown.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let mut kind: Option<Kind> = None;
    for (e, text) in entries.iter().zip(&shown) {
        if kind != Some(e.question.kind()) {
            kind = Some(e.question.kind());
            out.push_str(&format!("\n{}\n", e.question.kind().title()));
        }
        let flag = if e.redundant {
            format!("redundant [{}]", rules(e))
        } else {
            String::new()
        };
        out.push_str(&format!(
            "  {text:<width$}  {:.3}  {:>6}/{:<6} {flag}\n",
            c.pi_hat(e),
            e.count,
            c.k
        ));
    }
    out
}

pub fn table(c: &CredibleCatalog, sens: Option<&Sensitivity>) -> String {
    let retained = c.retained().count();
    let mut out = format!(
        "{} credible at tau = {} (n = {}, K = {}), {} after trimming\n",
        c.len(),
        c.threshold.tau(),
        c.n,
        c.k,
        retained
    );
    out.push_str(&rows(c, &grouped(c)));
    if let Some(s) = sens {
        let added: Vec<&CatalogEntry> = s.added.iter().map(|&i| &s.catalog.entries[i]).collect();
        out.push_str(&format!("\nAdded at tau* = {:.4}: {}\n", s.tau_star, added.len()));
        out.push_str(&rows(&s.catalog, &added));
    }
    out
}

pub fn csv(c: &CredibleCatalog) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(["kind", "key", "question", "count", "k", "pi_hat", "redundant", "rules"]).map_err(io)?;
    for e in &c.entries {
        w.write_record([
            e.question.kind().tag().to_string(),
            e.question.key(&c.labels),
            e.question.display(&c.labels),
            e.count.to_string(),
            c.k.to_string(),
            c.pi_hat(e).to_string(),
            e.redundant.to_string(),
            rules(e),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn count_table(q: &QuestionCount) -> String {
    let mut out = format!("n = {}\n", q.n);
    for kind in Kind::ALL {
        out.push_str(&format!("  {:<20} {}\n", kind.title(), q.get(kind)));
    }
    out.push_str(&format!("  {:<20} {}  (10^{:.2})\n", "Total", q.total, q.log10_total()));
    out
}

pub fn count_csv(q: &QuestionCount) -> String {
    let mut out = String::from("kind,count\n");
    for kind in Kind::ALL {
        out.push_str(&format!("{},{}\n", kind.tag(), q.get(kind)));
    }
    out.push_str(&format!("total,{}\n", q.total));
    out
}
