//! Seeded Monte Carlo experiments: trimmed-sum error measurements against
//! the main-term tables, classical ergodic averages, and the doubling-map
//! dispersion contrast.
//!
//! Samples are independent: per-sample seeds derive from the base seed by a
//! fixed splitmix64 scheme, orbits are generated once at the largest grid
//! horizon, and results are merged in seed order, so thread count never
//! changes output bytes.

pub mod persist;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::dynamics::{RealInput, SystemModel};
use crate::error::{Error, Result};
use crate::mainterm::{build_main_terms, MainTermTable, TailProfile};
use crate::mixing::MixingModel;
use crate::stats;
use crate::trimming::{birkhoff_sum_exact, trim_exact};

pub use persist::{persist, read_json, CsvRecord, OutputFormat};

/// splitmix64 finalizer over base_seed + index * golden gamma; the scheme is
/// splittable: extending the sample count never changes earlier seeds.
pub fn sample_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which system/observable pair an experiment runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemSpec {
    /// Gauss map, continued-fraction digit observable.
    GaussDigit,
    /// Doubling map, indicator of [0, 1/2).
    DoublingIndicator,
    /// Doubling map, reciprocal floor observable.
    DoublingReciprocal,
}

impl SystemSpec {
    pub fn model(self) -> SystemModel {
        match self {
            SystemSpec::GaussDigit => SystemModel::gauss(),
            SystemSpec::DoublingIndicator => SystemModel::doubling_indicator(),
            SystemSpec::DoublingReciprocal => SystemModel::doubling_reciprocal(),
        }
    }
}

impl std::fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemSpec::GaussDigit => write!(f, "gauss-digit"),
            SystemSpec::DoublingIndicator => write!(f, "doubling-indicator"),
            SystemSpec::DoublingReciprocal => write!(f, "doubling-reciprocal"),
        }
    }
}

/// Normalization family F_N for the dispersion experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// F_N = N ln N.
    NLogN,
    /// F_N = N^p.
    Power(f64),
}

impl Normalization {
    pub fn value(self, n: usize) -> f64 {
        let nf = n as f64;
        match self {
            Normalization::NLogN => nf * nf.ln(),
            Normalization::Power(p) => nf.powf(p),
        }
    }
}

/// Full description of a seeded experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub phi_p: f64,
    pub phi_q: f64,
    pub epsilon: f64,
    pub n_grid: Vec<usize>,
    pub sample_count: usize,
    pub base_seed: u64,
    /// Asserted mixing constant feeding G(N) = g * N.
    pub g_constant: f64,
    /// Orbit bit budget override (None = 64 * N + 4096).
    pub orbit_budget: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(system: SystemSpec, n_grid: Vec<usize>, sample_count: usize, base_seed: u64) -> Self {
        ExperimentConfig {
            system,
            phi_p: 1.0,
            phi_q: 0.0,
            epsilon: 0.5,
            n_grid,
            sample_count,
            base_seed,
            g_constant: 1.0,
            orbit_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = self.n_grid.windows(2).all(|w| w[0] < w[1]);
        if self.n_grid.is_empty() || self.n_grid[0] < 2 || !increasing {
            return Err(Error::InvalidGrid {
                min: 2,
                got: self.n_grid.clone(),
            });
        }
        if self.sample_count < 1 {
            return Err(Error::InvalidConfig("sample_count must be at least 1".into()));
        }
        self.profile().map(|_| ())
    }

    pub fn profile(&self) -> Result<TailProfile> {
        TailProfile::new(self.phi_p, self.phi_q, self.epsilon)
    }

    pub fn max_n(&self) -> usize {
        self.n_grid.last().copied().unwrap_or(0)
    }

    /// Main-term table over the configured grid with the asserted g.
    pub fn main_term_table(&self) -> Result<MainTermTable> {
        build_main_terms(
            &self.system.model(),
            &self.profile()?,
            &MixingModel::Constant(self.g_constant),
            &self.n_grid,
        )
    }

}

/// One (sample, horizon) measurement of the trim experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub n: usize,
    pub raw_sum: f64,
    pub max_term: f64,
    pub delta: u8,
    pub exceedances: usize,
    pub trimmed_sum: f64,
    /// N * F1(N).
    pub main_term: f64,
    /// trimmed_sum - main_term.
    pub error: f64,
    /// error / (F3^(2/3) * ln(F3)^(1/3 + epsilon)).
    pub normalized_error: f64,
}

impl CsvRecord for SampleRecord {
    fn csv_header() -> &'static str {
        "seed,N,raw,max,delta,exceedances,trimmed,main_term,error,normalized_error"
    }

    fn csv_row(&self) -> String {
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.n,
            self.raw_sum,
            self.max_term,
            self.delta,
            self.exceedances,
            self.trimmed_sum,
            self.main_term,
            self.error,
            self.normalized_error
        )
        .expect("string write");
        row
    }
}

/// A sample whose orbit generation failed; partial results are kept.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleFailure {
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrimExperimentResult {
    pub config: ExperimentConfig,
    pub table: MainTermTable,
    pub records: Vec<SampleRecord>,
    pub failures: Vec<SampleFailure>,
}

enum SampleOutcome<T> {
    Ok(Vec<T>),
    Failed(SampleFailure),
}

fn run_samples<T, F>(config: &ExperimentConfig, per_sample: F) -> (Vec<T>, Vec<SampleFailure>)
where
    T: Send,
    F: Fn(u64) -> Result<Vec<T>> + Sync,
{
    let outcomes: Vec<SampleOutcome<T>> = (0..config.sample_count as u64)
        .into_par_iter()
        .map(|index| {
            let seed = sample_seed(config.base_seed, index);
            match per_sample(seed) {
                Ok(records) => SampleOutcome::Ok(records),
                Err(err) => SampleOutcome::Failed(SampleFailure {
                    seed,
                    message: err.to_string(),
                }),
            }
        })
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            SampleOutcome::Ok(mut r) => records.append(&mut r),
            SampleOutcome::Failed(f) => failures.push(f),
        }
    }
    failures.sort_by_key(|f| f.seed);
    (records, failures)
}

/// Trimmed Birkhoff sums across the grid for every sample, measured against
/// the main-term table. Orbits are generated once per sample at the largest
/// horizon; records come back sorted by (seed, N).
pub fn run_trim_experiment(config: &ExperimentConfig) -> Result<TrimExperimentResult> {
    config.validate()?;
    let table = config.main_term_table()?;
    let system = config.system.model();
    let epsilon = config.epsilon;
    let max_n = config.max_n();
    let grid = config.n_grid.clone();
    let budget = config.orbit_budget;
    let table_ref = &table;
    let system_ref = &system;
    let grid_ref = &grid;

    let (mut records, failures) = run_samples(config, move |seed| {
        let mut x = RealInput::seeded(seed);
        let values = system_ref.orbit_values(&mut x, max_n, budget)?;
        let mut out = Vec::with_capacity(grid_ref.len());
        for (gi, &n) in grid_ref.iter().enumerate() {
            let tau = table_ref.tau[gi];
            let f1 = table_ref.f1[gi];
            let f3 = table_ref.f3[gi];
            let t = trim_exact(&values[..n], tau);
            let main_term = n as f64 * f1;
            let error = t.trimmed_sum - main_term;
            let denom = f3.powf(2.0 / 3.0) * f3.ln().powf(1.0 / 3.0 + epsilon);
            out.push(SampleRecord {
                seed,
                n,
                raw_sum: t.raw_sum,
                max_term: t.max_term,
                delta: t.delta,
                exceedances: t.exceedances,
                trimmed_sum: t.trimmed_sum,
                main_term,
                error,
                normalized_error: error / denom,
            });
        }
        Ok(out)
    });
    records.sort_by_key(|r| (r.seed, r.n));
    Ok(TrimExperimentResult {
        config: config.clone(),
        table,
        records,
        failures,
    })
}

/// Observable for the classical (integrable) experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClassicalObservable {
    /// The config system's own bounded observable.
    FromSystem,
    /// A constant function (averages are exact for every N).
    Constant(f64),
}

/// One (sample, horizon) ergodic-average measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRecord {
    pub seed: u64,
    pub n: usize,
    pub average: f64,
    pub expected: f64,
    /// average - expected.
    pub deviation: f64,
}

impl CsvRecord for ClassicalRecord {
    fn csv_header() -> &'static str {
        "seed,N,average,expected,deviation"
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.seed, self.n, self.average, self.expected, self.deviation
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<ClassicalRecord>,
    pub failures: Vec<SampleFailure>,
}

/// Ergodic averages of a bounded observable against its exact integral.
pub fn run_classical_experiment(
    config: &ExperimentConfig,
    observable: ClassicalObservable,
) -> Result<ClassicalExperimentResult> {
    config.validate()?;
    let system = config.system.model();
    let expected = match observable {
        ClassicalObservable::Constant(c) => {
            if c < 0.0 || !c.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "constant observable must be finite and non-negative, got {c}"
                )));
            }
            c
        }
        ClassicalObservable::FromSystem => system.integral().ok_or_else(|| {
            Error::InvalidConfig(format!(
                "system {} has no integrable observable; the classical experiment needs one",
                config.system
            ))
        })?,
    };
    let max_n = config.max_n();
    let grid = config.n_grid.clone();
    let budget = config.orbit_budget;
    let system_ref = &system;
    let grid_ref = &grid;

    let (mut records, failures) = run_samples(config, move |seed| {
        let averages: Vec<f64> = match observable {
            ClassicalObservable::Constant(c) => grid_ref.iter().map(|_| c).collect(),
            ClassicalObservable::FromSystem => {
                let mut x = RealInput::seeded(seed);
                let values = system_ref.orbit_values(&mut x, max_n, budget)?;
                grid_ref
                    .iter()
                    .map(|&n| birkhoff_sum_exact(&values[..n]) as f64 / n as f64)
                    .collect()
            }
        };
        Ok(grid_ref
            .iter()
            .zip(averages)
            .map(|(&n, average)| ClassicalRecord {
                seed,
                n,
                average,
                expected,
                deviation: average - expected,
            })
            .collect())
    });
    records.sort_by_key(|r| (r.seed, r.n));
    Ok(ClassicalExperimentResult {
        config: config.clone(),
        records,
        failures,
    })
}

/// One normalized trimmed sum for the dispersion experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRecord {
    pub seed: u64,
    pub n: usize,
    /// trimmed_sum / F_N.
    pub normalized: f64,
    pub delta: u8,
}

impl CsvRecord for NormalizedRecord {
    fn csv_header() -> &'static str {
        "seed,N,normalized,delta"
    }

    fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.seed, self.n, self.normalized, self.delta)
    }
}

/// Across-sample dispersion at one horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionRow {
    pub n: usize,
    pub median: f64,
    pub iqr: f64,
    pub max_over_median: f64,
}

impl CsvRecord for DispersionRow {
    fn csv_header() -> &'static str {
        "N,median,iqr,max_over_median"
    }

    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.n, self.median, self.iqr, self.max_over_median
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleResult {
    pub config: ExperimentConfig,
    pub normalization: Normalization,
    pub records: Vec<NormalizedRecord>,
    pub rows: Vec<DispersionRow>,
    pub failures: Vec<SampleFailure>,
}

/// Normalized trimmed sums and their across-sample dispersion: medians,
/// interquartile ranges, and max/median ratios per horizon. Demonstrates
/// non-concentration for the doubling reciprocal observable against the
/// Gauss control; a finite-sample report, deliberately weaker than any
/// almost-everywhere claim.
pub fn run_counterexample(
    config: &ExperimentConfig,
    normalization: Normalization,
) -> Result<CounterexampleResult> {
    config.validate()?;
    let profile = config.profile()?;
    let system = config.system.model();
    let max_n = config.max_n();
    let grid = config.n_grid.clone();
    let budget = config.orbit_budget;
    let taus: Vec<f64> = grid.iter().map(|&n| profile.tau(n)).collect::<Result<_>>()?;
    let system_ref = &system;
    let grid_ref = &grid;
    let taus_ref = &taus;

    let (mut records, failures) = run_samples(config, move |seed| {
        let mut x = RealInput::seeded(seed);
        let values = system_ref.orbit_values(&mut x, max_n, budget)?;
        Ok(grid_ref
            .iter()
            .zip(taus_ref.iter())
            .map(|(&n, &tau)| {
                let t = trim_exact(&values[..n], tau);
                NormalizedRecord {
                    seed,
                    n,
                    normalized: t.trimmed_sum / normalization.value(n),
                    delta: t.delta,
                }
            })
            .collect())
    });
    records.sort_by_key(|r| (r.seed, r.n));

    let rows = grid
        .iter()
        .map(|&n| {
            let column: Vec<f64> = records
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.normalized)
                .collect();
            let median = stats::median(&column);
            let iqr = stats::iqr(&column);
            let max = column.iter().copied().fold(f64::MIN, f64::max);
            DispersionRow {
                n,
                median,
                iqr,
                max_over_median: max / median,
            }
        })
        .collect();
    Ok(CounterexampleResult {
        config: config.clone(),
        normalization,
        records,
        rows,
        failures,
    })
}
