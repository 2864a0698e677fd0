//! The credible catalog: every credible question from every pass, in report order.

use std::collections::HashMap;
use std::time::Duration;

use crate::arrangements::{catalog_order, uncover_arrangements, Supported};
use crate::error::Result;
use crate::hdr::{hdr_set, rank_distributions, HdrSet, RankDistribution};
use crate::ingest::{AnalysisConfig, Samples, Threshold};
use crate::partial::{uncover_partial_hierarchies, PartialSearchOptions};
use crate::taxonomy::{Kind, Mid, Question};
use crate::trim::{trim_all, TrimReason, TrimReport};

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub question: Question,
    pub count: u64,
    pub redundant: bool,
    pub trimmed_by: Vec<TrimReason>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CredibleCatalog {
    pub labels: Vec<String>,
    pub n: usize,
    pub k: usize,
    pub threshold: Threshold,
    pub mid: Mid,
    pub entries: Vec<CatalogEntry>,
}

impl CredibleCatalog {
    /// Builds an unmarked catalog, sorting the entries into report order.
    pub fn new(
        labels: Vec<String>,
        k: usize,
        threshold: Threshold,
        mid: Mid,
        supported: Vec<Supported>,
    ) -> Self {
        let mut supported = supported;
        supported.sort_by(|a, b| {
            a.question
                .kind()
                .report_order()
                .cmp(&b.question.kind().report_order())
                .then_with(|| catalog_order(a, b))
        });
        let entries = supported
            .into_iter()
            .map(|s| CatalogEntry {
                question: s.question,
                count: s.count,
                redundant: false,
                trimmed_by: Vec::new(),
            })
            .collect();
        CredibleCatalog {
            n: labels.len(),
            labels,
            k,
            threshold,
            mid,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pi_hat(&self, entry: &CatalogEntry) -> f64 {
        entry.count as f64 / self.k as f64
    }

    pub fn position(&self, q: &Question) -> Option<usize> {
        self.entries.iter().position(|e| &e.question == q)
    }

    pub fn get(&self, q: &Question) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| &e.question == q)
    }

    pub fn of_kind(&self, kind: Kind) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(move |e| e.question.kind() == kind)
    }

    /// Entries left after trimming.
    pub fn retained(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(|e| !e.redundant)
    }

    pub(crate) fn index(&self) -> HashMap<&Question, usize> {
        self.entries.iter().enumerate().map(|(i, e)| (&e.question, i)).collect()
    }

    /// The `(question, count)` pairs sorted by question, for comparisons.
    pub fn supported(&self) -> Vec<Supported> {
        let mut out: Vec<Supported> = self
            .entries
            .iter()
            .map(|e| Supported {
                question: e.question.clone(),
                count: e.count,
            })
            .collect();
        out.sort_by(|a, b| a.question.cmp(&b.question));
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MineOptions {
    pub trim: bool,
    pub suffix_pruning: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub arrangements: Duration,
    pub partial: Duration,
    pub hdr: Duration,
    pub trim: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.arrangements + self.partial + self.hdr + self.trim
    }
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub catalog: CredibleCatalog,
    pub trim_report: Option<TrimReport>,
    pub rankograms: Vec<RankDistribution>,
    pub hdrs: Vec<HdrSet>,
    /// Chains evaluated at each size during the partial-hierarchy search.
    pub partial_evaluated: Vec<(usize, usize)>,
    pub timings: StageTimings,
}

/// Wall clock that reads zero where the platform has none (wasm32 in a browser).
struct Clock(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Clock {
    fn start() -> Self {
        Clock(
            #[cfg(not(target_arch = "wasm32"))]
            std::time::Instant::now(),
        )
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed();
        #[cfg(target_arch = "wasm32")]
        Duration::ZERO
    }
}

/// Runs every pass and, if asked, trims the result.
pub fn analyze(samples: &Samples, config: &AnalysisConfig, options: MineOptions) -> Result<Analysis> {
    let threshold = config.threshold;
    let mut timings = StageTimings::default();

    let start = Clock::start();
    let arr = uncover_arrangements(samples.ranks(), &threshold);
    timings.arrangements = start.elapsed();

    let start = Clock::start();
    let partial = uncover_partial_hierarchies(
        samples,
        &threshold,
        config.mid,
        PartialSearchOptions {
            suffix_pruning: options.suffix_pruning,
        },
    )?;
    timings.partial = start.elapsed();

    let start = Clock::start();
    let rankograms = rank_distributions(samples.ranks());
    let hdrs: Vec<HdrSet> = rankograms.iter().map(|d| hdr_set(d, &threshold)).collect();
    timings.hdr = start.elapsed();

    let n = samples.n();
    let mut supported = Vec::new();
    supported.extend(arr.ranked_permutations);
    supported.extend(arr.permutations);
    supported.extend(arr.ranked_combinations);
    supported.extend(arr.combinations);
    supported.extend(partial.credible.iter().map(|p| Supported {
        question: p.question(),
        count: p.count,
    }));
    supported.extend(hdrs.iter().filter_map(|h| {
        h.question(n).map(|question| Supported {
            question,
            count: h.mass,
        })
    }));
    let mut catalog = CredibleCatalog::new(samples.labels().to_vec(), samples.k(), threshold, config.mid, supported);

    let mut trim_report = None;
    if options.trim {
        let start = Clock::start();
        let (trimmed, report) = trim_all(&catalog, samples)?;
        timings.trim = start.elapsed();
        catalog = trimmed;
        trim_report = Some(report);
    }

    Ok(Analysis {
        catalog,
        trim_report,
        rankograms,
        hdrs,
        partial_evaluated: partial.evaluated_per_size,
        timings,
    })
}

/// The untrimmed catalog alone.
pub fn credible_catalog(samples: &Samples, threshold: &Threshold, mid: Mid) -> Result<CredibleCatalog> {
    let config = AnalysisConfig {
        threshold: *threshold,
        mid,
        direction: crate::ingest::Direction::Lower,
    };
    Ok(analyze(samples, &config, MineOptions::default())?.catalog)
}

/// A rerun at the lowered threshold τ* and what it adds.
#[derive(Clone, Debug)]
pub struct Sensitivity {
    pub tau_star: f64,
    pub catalog: CredibleCatalog,
    /// Indices into `catalog` of questions not credible at the original τ.
    pub added: Vec<usize>,
}

/// Reruns the analysis at τ* = τ − 2√(τ(1−τ)/K) with the same options.
pub fn sensitivity(
    samples: &Samples,
    config: &AnalysisConfig,
    options: MineOptions,
    base: &CredibleCatalog,
) -> Result<Sensitivity> {
    let tau_star = crate::ingest::sensitivity_threshold(config.threshold.tau(), samples.k())?;
    let lowered = AnalysisConfig {
        threshold: Threshold::with_guard(tau_star, config.threshold.guard().min(tau_star / 2.0))?,
        ..*config
    };
    let catalog = analyze(samples, &lowered, options)?.catalog;
    let known = base.index();
    let added = (0..catalog.len())
        .filter(|&i| !known.contains_key(&catalog.entries[i].question))
        .collect();
    Ok(Sensitivity {
        tau_star,
        catalog,
        added,
    })
}
