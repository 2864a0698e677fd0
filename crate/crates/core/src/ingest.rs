//! Sample matrices, rank matrices and the toy-example simulator.
//!
//! Effects are normalized on construction so that a smaller value is always
//! better. Every downstream module can therefore rank ascending without
//! looking at [`Direction`] again.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::Mid;

/// Which end of the effect scale is preferable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Lower,
    Higher,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Lower => Direction::Higher,
            Direction::Higher => Direction::Lower,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Lower => 1.0,
            Direction::Higher => -1.0,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lower => "lower",
            Direction::Higher => "higher",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lower" | "lower-better" | "lower_better" => Ok(Direction::Lower),
            "higher" | "higher-better" | "higher_better" => Ok(Direction::Higher),
            other => Err(Error::InvalidConfig(format!(
                "direction must be `lower` or `higher`, got `{other}`"
            ))),
        }
    }
}

fn validate_labels(labels: &[String]) -> Result<()> {
    if labels.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "at least 2 treatments are required, got {}",
            labels.len()
        )));
    }
    let mut seen = HashSet::new();
    for (column, label) in labels.iter().enumerate() {
        if label.trim().is_empty() {
            return Err(Error::Parse {
                row: 0,
                column: column + 1,
                message: "empty treatment name".into(),
            });
        }
        if !seen.insert(label.as_str()) {
            return Err(Error::Parse {
                row: 0,
                column: column + 1,
                message: format!("duplicate treatment name `{label}`"),
            });
        }
    }
    Ok(())
}

/// K samples of the relative effect of each of n treatments.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    labels: Vec<String>,
    /// Row-major K×n, already multiplied by the direction sign.
    normalized: Vec<f64>,
    direction: Direction,
}

impl SampleMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<f64>>, direction: Direction) -> Result<Self> {
        validate_labels(&labels)?;
        let n = labels.len();
        if rows.is_empty() {
            return Err(Error::InvalidInput("no sample rows".into()));
        }
        let mut normalized = Vec::with_capacity(rows.len() * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse {
                    row: r + 1,
                    column: row.len().min(n) + 1,
                    message: format!("expected {n} values, found {}", row.len()),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: c + 1,
                        message: format!("non-finite value {v}"),
                    });
                }
                normalized.push(v * direction.sign());
            }
        }
        Ok(SampleMatrix {
            labels,
            normalized,
            direction,
        })
    }

    /// Parses the effects CSV layout: a header of treatment names followed by
    /// one row of reals per sample.
    pub fn from_csv_reader<R: Read>(reader: R, direction: Direction) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let labels: Vec<String> = rdr
            .headers()
            .map_err(|e| csv_error(e, 0))?
            .iter()
            .map(str::to_owned)
            .collect();
        validate_labels(&labels)?;
        let n = labels.len();
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let row_index = i + 1;
            let record = record.map_err(|e| csv_error(e, row_index))?;
            if record.len() != n {
                return Err(Error::Parse {
                    row: row_index,
                    column: record.len().min(n) + 1,
                    message: format!("expected {n} cells, found {}", record.len()),
                });
            }
            let mut row = Vec::with_capacity(n);
            for (c, cell) in record.iter().enumerate() {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: row_index,
                    column: c + 1,
                    message: format!("`{cell}` is not a number"),
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        SampleMatrix::new(labels, rows, direction)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.normalized.len() / self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Effects of sample `row` on the lower-is-better scale.
    pub fn normalized_row(&self, row: usize) -> &[f64] {
        let n = self.n();
        &self.normalized[row * n..(row + 1) * n]
    }

    /// Effect as it appeared in the input.
    pub fn value(&self, row: usize, treatment: usize) -> f64 {
        self.normalized_row(row)[treatment] * self.direction.sign()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        index_of(&self.labels, label)
    }
}

pub(crate) fn index_of(labels: &[String], label: &str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::UnknownTreatment(label.to_owned()))
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::InvalidInput(e.to_string()),
        _ => Error::Parse {
            row,
            column: 0,
            message: e.to_string(),
        },
    }
}

/// Reads an effects CSV from disk.
pub fn load_effects_csv(path: impl AsRef<Path>, direction: Direction) -> Result<SampleMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    SampleMatrix::from_csv_reader(std::io::BufReader::new(file), direction)
}

/// Observed treatment hierarchy of every sample, best first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankMatrix {
    labels: Vec<String>,
    /// `order[row * n + r]` is the treatment holding rank `r + 1`.
    order: Vec<usize>,
    /// `position[row * n + t]` is the zero-based rank of treatment `t`.
    position: Vec<usize>,
}

impl RankMatrix {
    /// Builds a rank matrix from per-sample orderings of treatment indices.
    pub fn from_orders(labels: Vec<String>, rows: Vec<Vec<usize>>) -> Result<Self> {
        validate_labels(&labels)?;
        let n = labels.len();
        if rows.is_empty() {
            return Err(Error::InvalidInput("no sample rows".into()));
        }
        let mut order = Vec::with_capacity(rows.len() * n);
        let mut position = vec![usize::MAX; rows.len() * n];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Parse {
                    row: r + 1,
                    column: row.len().min(n) + 1,
                    message: format!("expected {n} treatments, found {}", row.len()),
                });
            }
            for (rank, &t) in row.iter().enumerate() {
                if t >= n || position[r * n + t] != usize::MAX {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: rank + 1,
                        message: "row is not a permutation of the treatments".into(),
                    });
                }
                position[r * n + t] = rank;
                order.push(t);
            }
        }
        Ok(RankMatrix {
            labels,
            order,
            position,
        })
    }

    /// Parses a rank CSV: an ignored header row, then one row of treatment
    /// names per sample ordered from rank 1 to rank n. Treatment indices
    /// follow the lexicographic order of the names.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut raw: Vec<Vec<String>> = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| csv_error(e, i + 1))?;
            raw.push(record.iter().map(str::to_owned).collect());
        }
        let first = raw
            .first()
            .ok_or_else(|| Error::InvalidInput("no sample rows".into()))?;
        let mut labels = first.clone();
        labels.sort();
        validate_labels(&labels)?;
        let rows = raw
            .iter()
            .enumerate()
            .map(|(r, names)| {
                names
                    .iter()
                    .enumerate()
                    .map(|(c, name)| {
                        labels.binary_search(name).map_err(|_| Error::Parse {
                            row: r + 1,
                            column: c + 1,
                            message: format!("unknown treatment `{name}`"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        RankMatrix::from_orders(labels, rows)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.order.len() / self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Treatments of sample `row`, best first.
    pub fn row(&self, row: usize) -> &[usize] {
        let n = self.n();
        &self.order[row * n..(row + 1) * n]
    }

    /// One-based rank of `treatment` in sample `row`.
    pub fn rank(&self, row: usize, treatment: usize) -> usize {
        self.position[row * self.n() + treatment] + 1
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        index_of(&self.labels, label)
    }
}

/// Reads a rank CSV from disk.
pub fn load_ranks_csv(path: impl AsRef<Path>) -> Result<RankMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    RankMatrix::from_csv_reader(std::io::BufReader::new(file))
}

/// Sorts every sample so the best treatment comes first. Ties keep column order.
pub fn rank_samples(m: &SampleMatrix) -> RankMatrix {
    let n = m.n();
    let rows = (0..m.k())
        .map(|r| {
            let values = m.normalized_row(r);
            let mut idx: Vec<usize> = (0..n).collect();
            // values are finite, so partial_cmp never fails; -0.0 == 0.0 here
            idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            idx
        })
        .collect();
    RankMatrix::from_orders(m.labels.clone(), rows).expect("sorted indices form permutations")
}

/// Everything the mining passes may need: the rank matrix always, the effect
/// matrix when the input carried effects rather than ranks.
#[derive(Clone, Debug)]
pub struct Samples {
    ranks: RankMatrix,
    effects: Option<SampleMatrix>,
}

impl Samples {
    pub fn from_effects(effects: SampleMatrix) -> Self {
        Samples {
            ranks: rank_samples(&effects),
            effects: Some(effects),
        }
    }

    pub fn from_ranks(ranks: RankMatrix) -> Self {
        Samples {
            ranks,
            effects: None,
        }
    }

    pub fn ranks(&self) -> &RankMatrix {
        &self.ranks
    }

    pub fn effects(&self) -> Option<&SampleMatrix> {
        self.effects.as_ref()
    }

    pub fn n(&self) -> usize {
        self.ranks.n()
    }

    pub fn k(&self) -> usize {
        self.ranks.k()
    }

    pub fn labels(&self) -> &[String] {
        self.ranks.labels()
    }

    /// Whether `chain` holds in sample `row` with consecutive gaps of at least `mid`.
    ///
    /// Without effects only `mid = 0` is answerable, from the rank order.
    pub(crate) fn chain_holds(&self, row: usize, chain: &[usize], mid: Mid) -> bool {
        match &self.effects {
            Some(m) => {
                let v = m.normalized_row(row);
                chain.windows(2).all(|w| v[w[1]] - v[w[0]] >= mid.value())
            }
            None => chain
                .windows(2)
                .all(|w| self.ranks.rank(row, w[0]) < self.ranks.rank(row, w[1])),
        }
    }

    pub(crate) fn check_mid(&self, mid: Mid) -> Result<()> {
        if self.effects.is_none() && mid.value() > 0.0 {
            return Err(Error::InvalidConfig(
                "a positive MID needs sampled effects, not just ranks".into(),
            ));
        }
        Ok(())
    }
}

/// Default tolerance subtracted from τ in every credibility comparison.
pub const DEFAULT_FLOAT_GUARD: f64 = 1e-12;

/// Credibility threshold τ together with its comparison guard.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    tau: f64,
    guard: f64,
}

impl Threshold {
    pub fn new(tau: f64) -> Result<Self> {
        Self::with_guard(tau, DEFAULT_FLOAT_GUARD)
    }

    pub fn with_guard(tau: f64, guard: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidConfig(format!("tau must lie in (0, 1], got {tau}")));
        }
        if !(guard >= 0.0 && guard < tau) {
            return Err(Error::InvalidConfig(format!(
                "float guard must lie in [0, tau), got {guard}"
            )));
        }
        Ok(Threshold { tau, guard })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    /// `count / k ≥ τ − guard`, and the question was observed at least once.
    pub fn admits(&self, count: u64, k: usize) -> bool {
        count > 0 && self.admits_probability(count as f64 / k as f64)
    }

    pub fn admits_probability(&self, p: f64) -> bool {
        p >= self.tau - self.guard
    }
}

/// Settings shared by every mining pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub threshold: Threshold,
    pub mid: Mid,
    pub direction: Direction,
}

impl AnalysisConfig {
    pub fn new(tau: f64, mid: f64, direction: Direction) -> Result<Self> {
        Ok(AnalysisConfig {
            threshold: Threshold::new(tau)?,
            mid: Mid::new(mid)?,
            direction,
        })
    }
}

/// Lower threshold for a sensitivity run: τ − 2√(τ(1−τ)/K).
pub fn sensitivity_threshold(tau: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidConfig(format!("tau must lie in (0, 1], got {tau}")));
    }
    if tau == 1.0 {
        return Ok(1.0);
    }
    Ok(tau - 2.0 * (tau * (1.0 - tau) / k as f64).sqrt())
}

/// Smallest K keeping the Monte Carlo standard error at τ below 0.01.
pub const RECOMMENDED_MIN_K: usize = 500;

/// Warning text when K is too small for a high threshold, `None` otherwise.
pub fn sample_size_warning(tau: f64, k: usize) -> Option<String> {
    (tau >= 0.95 && k < RECOMMENDED_MIN_K).then(|| {
        format!(
            "K = {k} samples at tau = {tau}: standard error may exceed 0.01; \
             consider at least {RECOMMENDED_MIN_K} effectively independent samples"
        )
    })
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
fn cholesky(cov: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = cov.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                let diag = cov[i][i] - s;
                if diag <= 0.0 {
                    return Err(Error::InvalidConfig("covariance is not positive definite".into()));
                }
                l[i][j] = diag.sqrt();
            } else {
                l[i][j] = (cov[i][j] - s) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Multivariate normal sampler over the non-reference treatments.
#[derive(Clone, Debug)]
pub struct MultivariateNormal {
    mean: Vec<f64>,
    factor: Vec<Vec<f64>>,
}

impl MultivariateNormal {
    pub fn new(mean: Vec<f64>, cov: &[Vec<f64>]) -> Result<Self> {
        if cov.len() != mean.len() || cov.iter().any(|r| r.len() != mean.len()) {
            return Err(Error::InvalidConfig("covariance shape does not match mean".into()));
        }
        Ok(MultivariateNormal {
            factor: cholesky(cov)?,
            mean,
        })
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.mean.len()).map(|_| StandardNormal.sample(rng)).collect();
        self.mean
            .iter()
            .zip(&self.factor)
            .map(|(mu, row)| mu + row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }
}

/// Effects of B–E against reference A in the five-treatment demonstration network.
pub const TOY_MEAN: [f64; 4] = [0.25, 0.95, 1.25, 1.5];
pub const TOY_VARIANCE: [f64; 4] = [0.025, 0.150, 0.025, 0.025];
pub const TOY_COVARIANCE: f64 = 0.010;

/// Draws K samples of the five-treatment toy network (A is the all-zero
/// reference, lower is better).
pub fn simulate_toy(k: usize, seed: u64) -> Result<SampleMatrix> {
    if k == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let cov: Vec<Vec<f64>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| if i == j { TOY_VARIANCE[i] } else { TOY_COVARIANCE })
                .collect()
        })
        .collect();
    let mvn = MultivariateNormal::new(TOY_MEAN.to_vec(), &cov)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..k)
        .map(|_| {
            let mut row = Vec::with_capacity(5);
            row.push(0.0);
            row.extend(mvn.sample(&mut rng));
            row
        })
        .collect();
    let labels = ["A", "B", "C", "D", "E"].map(String::from).to_vec();
    SampleMatrix::new(labels, rows, Direction::Lower)
}

/// Treatment names `A`, `B`, … (`T1`, `T2`, … past 26).
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if n <= 26 {
                ((b'A' + i as u8) as char).to_string()
            } else {
                format!("T{}", i + 1)
            }
        })
        .collect()
}

/// Random network with independent normal effects, used for equivalence checks
/// and stress runs. Means spread over [0, 1.5], standard deviations over [0.1, 0.5].
pub fn simulate_random_instance(n: usize, k: usize, seed: u64) -> Result<SampleMatrix> {
    if n < 2 || k == 0 {
        return Err(Error::InvalidConfig(format!(
            "random instance needs n >= 2 and K >= 1, got n = {n}, K = {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean_dist = Uniform::new(0.0, 1.5).expect("valid range");
    let sd_dist = Uniform::new(0.1, 0.5).expect("valid range");
    let params: Vec<(f64, f64)> = (0..n)
        .map(|_| (mean_dist.sample(&mut rng), sd_dist.sample(&mut rng)))
        .collect();
    let rows = (0..k)
        .map(|_| {
            params
                .iter()
                .map(|&(mu, sd)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    mu + sd * z
                })
                .collect()
        })
        .collect();
    SampleMatrix::new(default_labels(n), rows, Direction::Lower)
}
