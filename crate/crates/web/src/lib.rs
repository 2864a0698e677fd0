//! Browser bindings. Each export returns a JSON string; the `*_json` functions
//! behind them are plain Rust so they can be tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use credhier::hdr::{hdr_set, rank_distributions};
use credhier::ingest::simulate_toy;
use credhier::report::{catalog_json, rankograms_json, RunManifest};
use credhier::taxonomy::count_total;
use credhier::{analyze, AnalysisConfig, Direction, MineOptions, SampleMatrix, Samples, Threshold};

/// Largest K the page will simulate.
pub const MAX_K: u32 = 20_000;

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn toy(k: u32, seed: u32) -> Result<Samples, String> {
    if k == 0 || k > MAX_K {
        return Err(format!("K must lie in 1..={MAX_K}"));
    }
    Ok(Samples::from_effects(simulate_toy(k as usize, seed as u64).map_err(err)?))
}

fn run(samples: &Samples, input: String, seed: Option<u64>, tau: f64, mid: f64, direction: Direction, trim: bool) -> Result<String, String> {
    let config = AnalysisConfig::new(tau, mid, direction).map_err(err)?;
    let options = MineOptions {
        trim,
        ..MineOptions::default()
    };
    let a = analyze(samples, &config, options).map_err(err)?;
    let manifest = RunManifest {
        tool: "credhier-web".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input,
        n: samples.n(),
        k: samples.k(),
        labels: samples.labels().to_vec(),
        tau,
        tau_star: None,
        float_guard: config.threshold.guard(),
        mid: config.mid.value(),
        direction: direction.to_string(),
        seed,
        trim,
        timings: None,
    };
    serde_json::to_string(&catalog_json(manifest, &a.catalog, a.trim_report.as_ref(), None)).map_err(err)
}

/// Catalog of the five-treatment toy simulation.
pub fn analyze_toy_json(k: u32, seed: u32, tau: f64, mid: f64, trim: bool) -> Result<String, String> {
    let s = toy(k, seed)?;
    run(&s, format!("toy simulation (K={k}, seed={seed})"), Some(seed as u64), tau, mid, Direction::Lower, trim)
}

/// Catalog of pasted CSV text: a header of treatment names, one sample per row.
pub fn analyze_csv_json(text: &str, tau: f64, mid: f64, higher_is_better: bool, trim: bool) -> Result<String, String> {
    let direction = if higher_is_better { Direction::Higher } else { Direction::Lower };
    let m = SampleMatrix::from_csv_reader(text.as_bytes(), direction).map_err(err)?;
    run(&Samples::from_effects(m), "pasted CSV".into(), None, tau, mid, direction, trim)
}

/// Rank distributions of the toy simulation with each treatment's HDR at τ.
pub fn rankograms_toy_json(k: u32, seed: u32, tau: f64) -> Result<String, String> {
    let s = toy(k, seed)?;
    let threshold = Threshold::new(tau).map_err(err)?;
    let dists = rank_distributions(s.ranks());
    let hdrs: Vec<_> = dists.iter().map(|d| hdr_set(d, &threshold)).collect();
    serde_json::to_string(&rankograms_json(s.labels(), &dists, &hdrs)).map_err(err)
}

#[derive(Serialize)]
struct CountRow {
    n: usize,
    /// As a string: totals pass 2^53 well before the overflow limit.
    total: String,
    log10_total: f64,
    by_kind: Vec<(String, String)>,
}

/// Question counts for n = 2..=n_max, for the growth chart.
pub fn question_counts_json(n_max: u32) -> Result<String, String> {
    let rows = (2..=n_max as usize)
        .map(|n| {
            let q = count_total(n).map_err(err)?;
            Ok(CountRow {
                n,
                total: q.total.to_string(),
                log10_total: q.log10_total(),
                by_kind: credhier::Kind::ALL
                    .iter()
                    .map(|&k| (k.title().to_string(), q.get(k).to_string()))
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&rows).map_err(err)
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = analyzeToy)]
pub fn analyze_toy(k: u32, seed: u32, tau: f64, mid: f64, trim: bool) -> Result<String, JsError> {
    js(analyze_toy_json(k, seed, tau, mid, trim))
}

#[wasm_bindgen(js_name = analyzeCsv)]
pub fn analyze_csv(text: &str, tau: f64, mid: f64, higher_is_better: bool, trim: bool) -> Result<String, JsError> {
    js(analyze_csv_json(text, tau, mid, higher_is_better, trim))
}

#[wasm_bindgen(js_name = rankogramsToy)]
pub fn rankograms_toy(k: u32, seed: u32, tau: f64) -> Result<String, JsError> {
    js(rankograms_toy_json(k, seed, tau))
}

#[wasm_bindgen(js_name = questionCounts)]
pub fn question_counts(n_max: u32) -> Result<String, JsError> {
    js(question_counts_json(n_max))
}
