//! `credhier`: mine credible treatment-hierarchy questions from sampled effects.

mod render;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use credhier::catalog::{analyze, sensitivity, Analysis, MineOptions, Sensitivity};
use credhier::ingest::{
    load_effects_csv, load_ranks_csv, sample_size_warning, simulate_random_instance, simulate_toy,
};
use credhier::oracle::{brute_force_catalog, DEFAULT_N_CAP};
use credhier::report::{catalog_json, rankograms_csv, rankograms_json, RunManifest, TimingsJson};
use credhier::taxonomy::count_total;
use credhier::{AnalysisConfig, Direction, Error, Mid, Samples, Threshold};

const EXIT_INPUT: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "credhier", version, about = "Find every highly credible binary question about a treatment hierarchy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine, trim and report the credible catalog.
    Analyze(AnalyzeArgs),
    /// Number of distinct questions of each kind for n treatments.
    Count(CountArgs),
    /// Rankograms with highest-density regions, for plotting.
    PlotData(PlotArgs),
    /// Compare the mining passes with brute-force enumeration.
    OracleCheck(OracleArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// CSV of sampled relative effects: header of treatment names, one row per sample.
    #[arg(long, env = "CREDHIER_INPUT", group = "source")]
    input: Option<PathBuf>,
    /// CSV of sampled hierarchies: one row per sample listing treatments from rank 1 to n.
    #[arg(long, env = "CREDHIER_RANKS_INPUT", group = "source")]
    ranks_input: Option<PathBuf>,
    /// Use the built-in five-treatment toy simulation instead of a file.
    #[arg(long, group = "source")]
    simulate_toy: bool,
    /// Samples to draw for --simulate-toy.
    #[arg(long, env = "CREDHIER_K", default_value_t = 1000)]
    k: usize,
    #[arg(long, env = "CREDHIER_SEED", default_value_t = 1)]
    seed: u64,
    /// Whether smaller or larger effects are better.
    #[arg(long, env = "CREDHIER_DIRECTION", default_value = "lower")]
    direction: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Credibility threshold τ in (0, 1].
    #[arg(long, env = "CREDHIER_TAU", default_value_t = 0.95)]
    tau: f64,
    /// Minimal important difference for partial hierarchies.
    #[arg(long, env = "CREDHIER_MID", default_value_t = 0.0)]
    mid: f64,
    /// Flag redundant entries (default).
    #[arg(long, overrides_with = "no_trim")]
    trim: bool,
    /// Report the untrimmed catalog.
    #[arg(long)]
    no_trim: bool,
    /// Also rerun at τ* = τ − 2√(τ(1−τ)/K) and report what it adds.
    #[arg(long)]
    sensitivity: bool,
    #[arg(long, env = "CREDHIER_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "CREDHIER_THREADS", default_value_t = 0)]
    threads: usize,
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Include per-stage wall-clock times in the JSON manifest.
    #[arg(long)]
    timings: bool,
    /// Also require each chain's suffix to be credible during the partial-hierarchy search.
    #[arg(long)]
    suffix_pruning: bool,
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Number of treatments.
    n: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, env = "CREDHIER_TAU", default_value_t = 0.95)]
    tau: f64,
    /// json or csv.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Treatments in the random instance (ignored with an input file).
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Samples in the random instance.
    #[arg(long = "samples", default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.8)]
    tau: f64,
    #[arg(long, default_value_t = 0.0)]
    mid: f64,
    /// Largest n the brute force will enumerate.
    #[arg(long, env = "CREDHIER_N_CAP", default_value_t = DEFAULT_N_CAP)]
    n_cap: usize,
    /// Check an effects CSV instead of a random instance.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "lower")]
    direction: Direction,
    /// Drop one entry from the mined catalog before comparing.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Config(String),
    Io(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) if e.is_input_error() => EXIT_INPUT,
            Failure::Io(_) => EXIT_INPUT,
            Failure::Lib(_) | Failure::Config(_) => EXIT_CONFIG,
            Failure::Mismatch(_) => EXIT_MISMATCH,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Config(m) | Failure::Io(m) | Failure::Mismatch(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load(input: &InputArgs) -> Result<(Samples, String, Option<u64>), Failure> {
    if let Some(path) = &input.input {
        let m = load_effects_csv(path, input.direction)?;
        return Ok((Samples::from_effects(m), path.display().to_string(), None));
    }
    if let Some(path) = &input.ranks_input {
        let rm = load_ranks_csv(path)?;
        return Ok((Samples::from_ranks(rm), path.display().to_string(), None));
    }
    if input.simulate_toy {
        let m = simulate_toy(input.k, input.seed)?;
        let desc = format!("toy simulation (K={}, seed={})", input.k, input.seed);
        return Ok((Samples::from_effects(m), desc, Some(input.seed)));
    }
    Err(Failure::Config("one of --input, --ranks-input or --simulate-toy is required".into()))
}

fn emit(output: &Option<PathBuf>, text: &str) -> Outcome {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("cannot write output: {e}")))
        }
    }
}

fn set_threads(threads: usize) -> Outcome {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start {threads} threads: {e}")))?;
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Outcome {
    set_threads(args.threads)?;
    let config = AnalysisConfig::new(args.tau, args.mid, args.input.direction)?;
    let (samples, input_desc, seed) = load(&args.input)?;
    if let Some(w) = sample_size_warning(args.tau, samples.k()) {
        eprintln!("warning: {w}");
    }
    let options = MineOptions {
        trim: !args.no_trim,
        suffix_pruning: args.suffix_pruning,
    };
    let analysis: Analysis = analyze(&samples, &config, options)?;
    let sens: Option<Sensitivity> = if args.sensitivity {
        Some(sensitivity(&samples, &config, options, &analysis.catalog)?)
    } else {
        None
    };
    let manifest = RunManifest {
        tool: "credhier".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: input_desc,
        n: samples.n(),
        k: samples.k(),
        labels: samples.labels().to_vec(),
        tau: args.tau,
        tau_star: sens.as_ref().map(|s| s.tau_star),
        float_guard: config.threshold.guard(),
        mid: config.mid.value(),
        direction: args.input.direction.to_string(),
        seed,
        trim: options.trim,
        timings: args.timings.then(|| TimingsJson::from(analysis.timings)),
    };
    let text = match args.format {
        Format::Json => {
            let doc = catalog_json(manifest, &analysis.catalog, analysis.trim_report.as_ref(), sens.as_ref());
            let mut s = serde_json::to_string_pretty(&doc).expect("catalog serializes");
            s.push('\n');
            s
        }
        Format::Table => render::table(&analysis.catalog, sens.as_ref()),
        Format::Csv => render::csv(&analysis.catalog)?,
    };
    emit(&args.output, &text)
}

fn cmd_count(args: CountArgs) -> Outcome {
    let counts = count_total(args.n)?;
    let text = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&counts).expect("counts serialize");
            s.push('\n');
            s
        }
        Format::Table => render::count_table(&counts),
        Format::Csv => render::count_csv(&counts),
    };
    emit(&None, &text)
}

fn cmd_plot_data(args: PlotArgs) -> Outcome {
    let threshold = Threshold::new(args.tau)?;
    let (samples, _, _) = load(&args.input)?;
    let dists = credhier::hdr::rank_distributions(samples.ranks());
    let hdrs: Vec<_> = dists.iter().map(|d| credhier::hdr::hdr_set(d, &threshold)).collect();
    let text = match args.format {
        Format::Csv => rankograms_csv(samples.labels(), &dists, &hdrs),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&rankograms_json(samples.labels(), &dists, &hdrs))
                .expect("rankograms serialize");
            s.push('\n');
            s
        }
        Format::Table => return Err(Failure::Config("plot-data writes json or csv".into())),
    };
    emit(&args.output, &text)
}

fn cmd_oracle_check(args: OracleArgs) -> Outcome {
    let threshold = Threshold::new(args.tau)?;
    let mid = Mid::new(args.mid)?;
    let samples = match &args.input {
        Some(path) => Samples::from_effects(load_effects_csv(path, args.direction)?),
        None => {
            if args.n > args.n_cap {
                return Err(Error::OracleCap { n: args.n, cap: args.n_cap }.into());
            }
            Samples::from_effects(simulate_random_instance(args.n, args.samples, args.seed)?)
        }
    };
    let slow = brute_force_catalog(&samples, &threshold, mid, args.n_cap)?;
    let mut fast = credhier::catalog::credible_catalog(&samples, &threshold, mid)?.supported();
    if args.inject_fault && !fast.is_empty() {
        fast.remove(fast.len() / 2);
    }
    let labels = samples.labels();
    let only_fast: Vec<String> = fast
        .iter()
        .filter(|e| !slow.entries.contains(e))
        .map(|e| format!("  + {} ({})", e.question.key(labels), e.count))
        .collect();
    let only_slow: Vec<String> = slow
        .entries
        .iter()
        .filter(|e| !fast.contains(e))
        .map(|e| format!("  - {} ({})", e.question.key(labels), e.count))
        .collect();
    let header = format!(
        "n={} K={} tau={} mid={}: {} credible entries by brute force",
        samples.n(),
        samples.k(),
        args.tau,
        args.mid,
        slow.entries.len()
    );
    if only_fast.is_empty() && only_slow.is_empty() {
        println!("PASS {header}");
        return Ok(());
    }
    let mut report = format!("FAIL {header}\nmined but not enumerated (+), enumerated but not mined (-):\n");
    for line in only_fast.iter().chain(&only_slow) {
        report.push_str(line);
        report.push('\n');
    }
    print!("{report}");
    Err(Failure::Mismatch("catalogs differ".into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Count(a) => cmd_count(a),
        Command::PlotData(a) => cmd_plot_data(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
