//! Correlation-sum mixing bounds.
//!
//! The quantity of interest for cells i, j and horizon N is
//!
//!   sum_{n=0}^{N} ( mu(A_i intersect T^{-n} A_j) / (mu(A_i) mu(A_j)) - 1 )
//!
//! computed exactly for the doubling map (dyadic cylinder intersections) and
//! for Markov shifts (powers of the exact transition matrix), and estimated
//! from a long orbit for the Gauss map. Profiles clamp the supremum below at
//! zero: only an upper bound enters the main-term tables.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{gauss_digits, RealInput, SystemKind, SystemModel};
use crate::error::{Error, Result};
use crate::mainterm::gauss_digit_probability;

/// How a mixing bound was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MixingMode {
    Exact,
    Empirical,
    Asserted,
}

impl std::fmt::Display for MixingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MixingMode::Exact => write!(f, "exact"),
            MixingMode::Empirical => write!(f, "empirical"),
            MixingMode::Asserted => write!(f, "asserted"),
        }
    }
}

/// Worst observed pair at one horizon, kept as the profile's certificate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WorstPair {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// A per-N bound g(N) for the correlation sums, with its cumulative G.
#[derive(Clone, Debug, Serialize)]
pub struct MixingProfile {
    pub mode: MixingMode,
    pub cell_cap: usize,
    /// g[k] is the bound at N = k + 1.
    pub g: Vec<f64>,
    pub certificate: Vec<WorstPair>,
}

impl MixingProfile {
    pub fn asserted(constant: f64, n_max: usize) -> Self {
        MixingProfile {
            mode: MixingMode::Asserted,
            cell_cap: 0,
            g: vec![constant.max(0.0); n_max],
            certificate: Vec::new(),
        }
    }

    /// g(N), extending past the table with the last value.
    pub fn g_at(&self, n: usize) -> f64 {
        if n == 0 || self.g.is_empty() {
            return 0.0;
        }
        let idx = (n - 1).min(self.g.len() - 1);
        self.g[idx]
    }

    /// G(N) = sum of g(1..=N).
    pub fn cumulative(&self, n: usize) -> f64 {
        (1..=n).map(|k| self.g_at(k)).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,g,G,mode\n");
        let mut cumulative = 0.0;
        for (k, &g) in self.g.iter().enumerate() {
            cumulative += g;
            writeln!(out, "{},{},{},{}", k + 1, g, cumulative, self.mode).expect("string write");
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

/// The g(n) model fed into main-term tables.
#[derive(Clone, Debug)]
pub enum MixingModel {
    /// g(n) = c for all n.
    Constant(f64),
    /// Tabulated g(1..), extended by its last value.
    Table(Vec<f64>),
}

impl MixingModel {
    pub fn from_profile(profile: &MixingProfile) -> Self {
        MixingModel::Table(profile.g.clone())
    }

    pub fn g(&self, n: usize) -> f64 {
        match self {
            MixingModel::Constant(c) => *c,
            MixingModel::Table(g) => {
                if n == 0 || g.is_empty() {
                    0.0
                } else {
                    g[(n - 1).min(g.len() - 1)]
                }
            }
        }
    }

    /// G(N) = sum of g over 1..=N.
    pub fn cumulative(&self, n: usize) -> f64 {
        match self {
            MixingModel::Constant(c) => c * n as f64,
            MixingModel::Table(_) => (1..=n).map(|k| self.g(k)).sum(),
        }
    }
}

/// Exact intersection measure mu(cyl(word_i) intersect T^{-n} cyl(word_j))
/// for the doubling map: disjoint bit blocks are independent, overlapping
/// blocks must agree.
pub fn doubling_intersection_measure(word_i: &[u8], word_j: &[u8], n: usize) -> BigRational {
    let len_i = word_i.len();
    let len_j = word_j.len();
    if n >= len_i {
        // blocks [0, len_i) and [n, n+len_j) are disjoint
        return dyadic(len_i + len_j);
    }
    // overlap on [n, min(len_i, n+len_j))
    let overlap = len_i.min(n + len_j) - n;
    for k in 0..overlap {
        if word_i[n + k] != word_j[k] {
            return BigRational::zero();
        }
    }
    // constrained bits: [0, max(len_i, n + len_j))
    dyadic(len_i.max(n + len_j))
}

fn dyadic(bits: usize) -> BigRational {
    BigRational::new(1.into(), num_bigint::BigInt::one() << bits)
}

fn doubling_word(cell: usize, level: usize) -> Vec<u8> {
    (0..level)
        .map(|b| ((cell >> (level - 1 - b)) & 1) as u8)
        .collect()
}

fn exact_cells(system: &SystemModel, cell_cap: usize) -> Result<usize> {
    match system.kind {
        SystemKind::Doubling => Ok(cell_cap.min(1 << system.doubling_level())),
        SystemKind::Markov => Ok(cell_cap.min(system.markov_chain().expect("markov").len())),
        SystemKind::Gauss => Err(Error::InvalidConfig(
            "exact correlation sums are available for the doubling map and Markov shifts only"
                .into(),
        )),
    }
}

/// One exact correlation term mu(A_i cap T^{-n}A_j)/(mu_i mu_j) - 1.
pub fn correlation_term_exact(
    system: &SystemModel,
    i: usize,
    j: usize,
    n: usize,
) -> Result<BigRational> {
    let cells = exact_cells(system, usize::MAX)?;
    if i >= cells || j >= cells {
        return Err(Error::InvalidCell {
            cell: i.max(j),
            system: system.kind.to_string(),
        });
    }
    match system.kind {
        SystemKind::Doubling => {
            let level = system.doubling_level();
            let wi = doubling_word(i, level);
            let wj = doubling_word(j, level);
            let joint = doubling_intersection_measure(&wi, &wj, n);
            let denom = dyadic(2 * level);
            Ok(joint / denom - BigRational::one())
        }
        SystemKind::Markov => {
            let chain = system.markov_chain().expect("markov");
            let joint = &chain.stationary[i] * chain.power_entry(n, i, j);
            let denom = &chain.stationary[i] * &chain.stationary[j];
            if denom.is_zero() {
                return Err(Error::InvalidCell {
                    cell: if chain.stationary[i].is_zero() { i } else { j },
                    system: "markov (zero-mass state)".into(),
                });
            }
            Ok(joint / denom - BigRational::one())
        }
        SystemKind::Gauss => unreachable!(),
    }
}

/// Exact correlation sum over n = 0..=N.
pub fn correlation_sum_exact(
    system: &SystemModel,
    i: usize,
    j: usize,
    n: usize,
) -> Result<BigRational> {
    let mut total = BigRational::zero();
    for step in 0..=n {
        total += correlation_term_exact(system, i, j, step)?;
    }
    Ok(total)
}

/// Empirical correlation estimate with a heuristic standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmpiricalCorrelation {
    pub value: f64,
    pub std_error: f64,
}

/// Empirical correlation sum for Gauss digit cells i, j over n = 0..=N,
/// estimated from a digit orbit of length at least 100 * N.
pub fn correlation_sum_empirical(
    symbols: &[u64],
    i: u64,
    j: u64,
    n: usize,
) -> Result<EmpiricalCorrelation> {
    if i == 0 || j == 0 {
        return Err(Error::InvalidCell {
            cell: 0,
            system: "gauss".into(),
        });
    }
    if symbols.len() < 100 * n.max(1) {
        return Err(Error::InsufficientOrbit {
            required: 100 * n.max(1),
            got: symbols.len(),
        });
    }
    let pi = gauss_digit_probability(i);
    let pj = gauss_digit_probability(j);
    let mut value = 0.0;
    let mut variance = 0.0;
    for step in 0..=n {
        let windows = symbols.len() - step;
        let hits = (0..windows)
            .filter(|&m| symbols[m] == i && symbols[m + step] == j)
            .count();
        let p_hat = hits as f64 / windows as f64;
        value += p_hat / (pi * pj) - 1.0;
        let se = (p_hat * (1.0 - p_hat) / windows as f64).sqrt() / (pi * pj);
        variance += se * se;
    }
    Ok(EmpiricalCorrelation {
        value,
        std_error: variance.sqrt(),
    })
}

/// Options for estimating a mixing profile.
#[derive(Clone, Debug)]
pub struct GEstimateOptions {
    pub mode: MixingMode,
    /// Constant used in asserted mode (clamped at zero).
    pub asserted_constant: f64,
    /// Seed for the empirical orbit.
    pub seed: u64,
    /// Orbit length for empirical mode; defaults to 100 * N_max.
    pub orbit_len: Option<usize>,
}

impl Default for GEstimateOptions {
    fn default() -> Self {
        GEstimateOptions {
            mode: MixingMode::Exact,
            asserted_constant: 1.0,
            seed: 0,
            orbit_len: None,
        }
    }
}

/// Estimate g(N) for N = 1..=n_max as the worst correlation sum over cells
/// up to `cell_cap`, clamped below at zero.
pub fn estimate_g(
    system: &SystemModel,
    n_max: usize,
    cell_cap: usize,
    options: &GEstimateOptions,
) -> Result<MixingProfile> {
    if cell_cap == 0 {
        return Err(Error::InvalidConfig("cell_cap must be at least 1".into()));
    }
    match options.mode {
        MixingMode::Asserted => {
            let mut profile = MixingProfile::asserted(options.asserted_constant, n_max);
            profile.cell_cap = cell_cap;
            Ok(profile)
        }
        MixingMode::Exact => {
            let cells = exact_cells(system, cell_cap)?;
            let matrix = exact_sum_trajectories(system, cells, n_max)?;
            Ok(profile_from_trajectories(
                MixingMode::Exact,
                cell_cap,
                n_max,
                |i, j, n| matrix[i][j][n],
                cells,
                0,
            ))
        }
        MixingMode::Empirical => {
            if system.kind != SystemKind::Gauss {
                return Err(Error::InvalidConfig(
                    "empirical mixing estimates are implemented for the Gauss map".into(),
                ));
            }
            let len = options.orbit_len.unwrap_or(100 * n_max);
            if len < 100 * n_max {
                return Err(Error::InsufficientOrbit {
                    required: 100 * n_max,
                    got: len,
                });
            }
            let mut x = RealInput::seeded(options.seed);
            let orbit = gauss_digits(&mut x, len, None)?;
            let counts = gauss_pair_counts(&orbit.symbols, cell_cap, n_max);
            let sums = empirical_sum_trajectories(&counts, orbit.symbols.len(), cell_cap, n_max);
            Ok(profile_from_trajectories(
                MixingMode::Empirical,
                cell_cap,
                n_max,
                |i, j, n| sums[i][j][n],
                cell_cap,
                1,
            ))
        }
    }
}

/// counts[i][j][n] = #{m : a_m = i+1, a_{m+n} = j+1} for one pass over the orbit.
fn gauss_pair_counts(symbols: &[u64], cell_cap: usize, n_max: usize) -> Vec<Vec<Vec<u64>>> {
    let mut counts = vec![vec![vec![0u64; n_max + 1]; cell_cap]; cell_cap];
    for (m, &sym) in symbols.iter().enumerate() {
        if sym == 0 || sym > cell_cap as u64 {
            continue;
        }
        let i = (sym - 1) as usize;
        let top = n_max.min(symbols.len() - 1 - m);
        for step in 0..=top {
            let other = symbols[m + step];
            if other >= 1 && other <= cell_cap as u64 {
                counts[i][(other - 1) as usize][step] += 1;
            }
        }
    }
    counts
}

fn empirical_sum_trajectories(
    counts: &[Vec<Vec<u64>>],
    orbit_len: usize,
    cell_cap: usize,
    n_max: usize,
) -> Vec<Vec<Vec<f64>>> {
    let mut sums = vec![vec![vec![0.0f64; n_max + 1]; cell_cap]; cell_cap];
    for i in 0..cell_cap {
        let pi = gauss_digit_probability(i as u64 + 1);
        for j in 0..cell_cap {
            let pj = gauss_digit_probability(j as u64 + 1);
            let mut running = 0.0;
            for n in 0..=n_max {
                let windows = (orbit_len - n) as f64;
                let p_hat = counts[i][j][n] as f64 / windows;
                running += p_hat / (pi * pj) - 1.0;
                sums[i][j][n] = running;
            }
        }
    }
    sums
}

/// Cumulative exact correlation sums for every pair, as f64 trajectories.
fn exact_sum_trajectories(
    system: &SystemModel,
    cells: usize,
    n_max: usize,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let mut sums = vec![vec![vec![0.0f64; n_max + 1]; cells]; cells];
    match system.kind {
        SystemKind::Doubling => {
            let level = system.doubling_level();
            let words: Vec<Vec<u8>> = (0..cells).map(|c| doubling_word(c, level)).collect();
            let denom = dyadic(2 * level);
            for i in 0..cells {
                for j in 0..cells {
                    let mut running = BigRational::zero();
                    for n in 0..=n_max {
                        let joint = doubling_intersection_measure(&words[i], &words[j], n);
                        running += joint / &denom - BigRational::one();
                        sums[i][j][n] = running.to_f64().unwrap_or(f64::NAN);
                    }
                }
            }
        }
        SystemKind::Markov => {
            let chain = system.markov_chain().expect("markov");
            let size = chain.len();
            // walk the matrix powers once
            let mut power: Vec<Vec<BigRational>> = (0..size)
                .map(|r| {
                    (0..size)
                        .map(|c| {
                            if r == c {
                                BigRational::one()
                            } else {
                                BigRational::zero()
                            }
                        })
                        .collect()
                })
                .collect();
            let mut running =
                vec![vec![BigRational::zero(); cells]; cells];
            for n in 0..=n_max {
                for i in 0..cells {
                    for j in 0..cells {
                        let joint = &chain.stationary[i] * &power[i][j];
                        let denom = &chain.stationary[i] * &chain.stationary[j];
                        if denom.is_zero() {
                            return Err(Error::InvalidCell {
                                cell: j,
                                system: "markov (zero-mass state)".into(),
                            });
                        }
                        running[i][j] += joint / denom - BigRational::one();
                        sums[i][j][n] = running[i][j].to_f64().unwrap_or(f64::NAN);
                    }
                }
                if n < n_max {
                    power = matrix_product(&power, &chain.transition);
                }
            }
        }
        SystemKind::Gauss => unreachable!("guarded by exact_cells"),
    }
    Ok(sums)
}

fn matrix_product(
    a: &[Vec<BigRational>],
    b: &[Vec<BigRational>],
) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let mut out = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

fn profile_from_trajectories(
    mode: MixingMode,
    cell_cap: usize,
    n_max: usize,
    sum_at: impl Fn(usize, usize, usize) -> f64,
    cells: usize,
    cell_offset: usize,
) -> MixingProfile {
    let mut g = Vec::with_capacity(n_max);
    let mut certificate = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0, 0);
        for i in 0..cells {
            for j in 0..cells {
                let v = sum_at(i, j, n);
                if v > best {
                    best = v;
                    arg = (i + cell_offset, j + cell_offset);
                }
            }
        }
        certificate.push(WorstPair {
            n,
            i: arg.0,
            j: arg.1,
            value: best,
        });
        g.push(best.max(0.0));
    }
    MixingProfile {
        mode,
        cell_cap,
        g,
        certificate,
    }
}

/// Correlation-sum matrix over all cell pairs with a cap-stability probe.
#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    pub n: usize,
    pub cell_cap: usize,
    pub mode: MixingMode,
    /// matrix[i][j] = correlation sum for the (i, j) cell pair.
    pub matrix: Vec<Vec<f64>>,
    pub std_errors: Option<Vec<Vec<f64>>>,
    pub max_value: f64,
    pub argmax: (usize, usize),
    /// Maximum over the half-cap sub-matrix.
    pub max_at_half_cap: f64,
    /// True when the maximum grows from cap/2 to cap beyond noise.
    pub grows_with_cap: bool,
}

/// Evidence for or against a uniform correlation bound: the full pair matrix
/// at horizon N, re-evaluated at half the cell cap.
pub fn uniformity_report(
    system: &SystemModel,
    n: usize,
    cell_cap: usize,
    options: &GEstimateOptions,
) -> Result<UniformityReport> {
    if cell_cap == 0 {
        return Err(Error::InvalidConfig("cell_cap must be at least 1".into()));
    }
    let (matrix, std_errors, mode, cells) = match (system.kind, options.mode) {
        (SystemKind::Gauss, _) => {
            let len = options.orbit_len.unwrap_or(100 * n.max(1));
            if len < 100 * n.max(1) {
                return Err(Error::InsufficientOrbit {
                    required: 100 * n.max(1),
                    got: len,
                });
            }
            let mut x = RealInput::seeded(options.seed);
            let orbit = gauss_digits(&mut x, len, None)?;
            let counts = gauss_pair_counts(&orbit.symbols, cell_cap, n);
            let mut matrix = vec![vec![0.0f64; cell_cap]; cell_cap];
            let mut errors = vec![vec![0.0f64; cell_cap]; cell_cap];
            for i in 0..cell_cap {
                let pi = gauss_digit_probability(i as u64 + 1);
                for j in 0..cell_cap {
                    let pj = gauss_digit_probability(j as u64 + 1);
                    let mut value = 0.0;
                    let mut variance = 0.0;
                    for step in 0..=n {
                        let windows = (orbit.symbols.len() - step) as f64;
                        let p_hat = counts[i][j][step] as f64 / windows;
                        value += p_hat / (pi * pj) - 1.0;
                        let se = (p_hat * (1.0 - p_hat) / windows).sqrt() / (pi * pj);
                        variance += se * se;
                    }
                    matrix[i][j] = value;
                    errors[i][j] = variance.sqrt();
                }
            }
            (matrix, Some(errors), MixingMode::Empirical, cell_cap)
        }
        (_, _) => {
            let cells = exact_cells(system, cell_cap)?;
            let sums = exact_sum_trajectories(system, cells, n)?;
            let matrix: Vec<Vec<f64>> = (0..cells)
                .map(|i| (0..cells).map(|j| sums[i][j][n]).collect())
                .collect();
            (matrix, None, MixingMode::Exact, cells)
        }
    };

    let max_over = |limit: usize| -> (f64, (usize, usize)) {
        let mut best = f64::NEG_INFINITY;
        let mut arg = (0, 0);
        for i in 0..limit.min(cells) {
            for j in 0..limit.min(cells) {
                if matrix[i][j] > best {
                    best = matrix[i][j];
                    arg = (i, j);
                }
            }
        }
        (best, arg)
    };
    let (max_value, argmax) = max_over(cells);
    let (max_at_half_cap, half_arg) = max_over((cells / 2).max(1));
    let tolerance = match &std_errors {
        Some(errors) => {
            3.0 * (errors[argmax.0][argmax.1].powi(2) + errors[half_arg.0][half_arg.1].powi(2))
                .sqrt()
        }
        None => 1e-12 * max_value.abs().max(1.0),
    };
    Ok(UniformityReport {
        n,
        cell_cap,
        mode,
        matrix,
        std_errors,
        max_value,
        argmax,
        max_at_half_cap,
        grows_with_cap: max_value - max_at_half_cap > tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_abs_diff_eq;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn doubling_level_one_hand_values() {
        let sys = SystemModel::doubling_indicator();
        // n = 0 self term: 1/mu - 1 = 1
        assert_eq!(correlation_term_exact(&sys, 0, 0, 0).unwrap(), rat(1, 1));
        // n = 1 term vanishes: mu(A_0 cap T^-1 A_0) = 1/4 = mu^2
        assert_eq!(correlation_term_exact(&sys, 0, 0, 1).unwrap(), rat(0, 1));
        assert_eq!(correlation_sum_exact(&sys, 0, 0, 1).unwrap(), rat(1, 1));
        // off-diagonal n = 0: disjoint cells
        assert_eq!(correlation_term_exact(&sys, 0, 1, 0).unwrap(), rat(-1, 1));
    }

    #[test]
    fn doubling_terms_vanish_past_cylinder_length() {
        for level in 1..=4usize {
            let sys = SystemModel::doubling_indicator().with_doubling_level(level);
            for i in 0..(1 << level) {
                for j in 0..(1 << level) {
                    for n in level..=8 {
                        assert_eq!(
                            correlation_term_exact(&sys, i, j, n).unwrap(),
                            BigRational::zero(),
                            "level {level}, pair ({i},{j}), n {n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn markov_uniform_matches_doubling_level_one() {
        let matrix = vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]];
        let markov = SystemModel::markov(matrix, vec![1.0, 0.0]).unwrap();
        let doubling = SystemModel::doubling_indicator();
        for i in 0..2 {
            for j in 0..2 {
                for n in 0..6 {
                    assert_eq!(
                        correlation_term_exact(&markov, i, j, n).unwrap(),
                        correlation_term_exact(&doubling, i, j, n).unwrap(),
                        "pair ({i},{j}) at n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn estimate_g_doubling_is_one() {
        let sys = SystemModel::doubling_indicator();
        let profile = estimate_g(&sys, 12, 2, &GEstimateOptions::default()).unwrap();
        for n in 1..=12 {
            assert_abs_diff_eq!(profile.g_at(n), 1.0, epsilon = 1e-12);
        }
        assert_eq!(profile.mode, MixingMode::Exact);
    }

    #[test]
    fn asserted_profile_cumulates_linearly() {
        let sys = SystemModel::gauss();
        let options = GEstimateOptions {
            mode: MixingMode::Asserted,
            ..GEstimateOptions::default()
        };
        let profile = estimate_g(&sys, 100, 10, &options).unwrap();
        assert_abs_diff_eq!(profile.cumulative(100), 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(profile.g_at(7), 1.0);
    }

    #[test]
    fn markov_spectral_gap_bounded_no_trend() {
        // symmetric two-state chain with eigenvalue 1/2
        let matrix = vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]];
        let sys = SystemModel::markov(matrix, vec![2.0, 1.0]).unwrap();
        let profile = estimate_g(&sys, 40, 2, &GEstimateOptions::default()).unwrap();
        // oracle: the diagonal term at lag n is (1/2)^n, so
        // g(N) = 1 + sum_{n=1..N} 2^-n < 2
        for n in 1..=40 {
            let oracle: f64 = 1.0 + (1..=n).map(|k| 0.5f64.powi(k as i32)).sum::<f64>();
            assert_abs_diff_eq!(profile.g_at(n), oracle, epsilon = 1e-9);
        }
        let pairs: Vec<(f64, f64)> = (5..=40)
            .map(|n| (n as f64, profile.g_at(n)))
            .collect();
        let fit = stats::fit_exponent(&pairs).unwrap();
        assert!(fit.slope.abs() <= 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn monotone_cumulative_and_clamping() {
        let matrix = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]];
        // periodic chain: correlation sums oscillate, clamp keeps g >= 0
        let sys = SystemModel::markov(matrix, vec![1.0, 1.0]).unwrap();
        let profile = estimate_g(&sys, 9, 2, &GEstimateOptions::default()).unwrap();
        assert!(profile.g.iter().all(|&g| g >= 0.0));
        let mut last = 0.0;
        for n in 1..=9 {
            let c = profile.cumulative(n);
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn uniformity_report_doubling_stable() {
        let sys = SystemModel::doubling_indicator().with_doubling_level(2);
        let report = uniformity_report(&sys, 6, 4, &GEstimateOptions::default()).unwrap();
        assert_eq!(report.mode, MixingMode::Exact);
        assert_eq!(report.matrix.len(), 4);
        assert!(report.max_value >= report.max_at_half_cap);
        // worst pair is a constant word: 1/mu - 1 = 3 at n = 0, +1 at n = 1
        assert_abs_diff_eq!(report.max_value, 4.0, epsilon = 1e-12);
        // the half-cap submatrix already contains the word 00
        assert!(!report.grows_with_cap);
    }

    #[test]
    fn gauss_empirical_uniformity_detects_self_term_growth() {
        // digit cells up to cap 20 versus the half-cap 10 at horizon 50,
        // estimated from one 5000-digit orbit. The n = 0 self term equals
        // 1/mu(A_i) - 1, which grows like i^2 along the diagonal, so the
        // report must flag growth with the cap: the gauss digit partition
        // has no uniform correlation bound under the n >= 0 convention,
        // which is why the asserted profile is a configuration choice.
        let sys = SystemModel::gauss();
        let options = GEstimateOptions {
            mode: MixingMode::Empirical,
            seed: 4,
            ..GEstimateOptions::default()
        };
        let report = uniformity_report(&sys, 50, 20, &options).unwrap();
        assert_eq!(report.mode, MixingMode::Empirical);
        assert_eq!(report.matrix.len(), 20);
        assert!(report.std_errors.is_some());
        assert_eq!(report.argmax, (19, 19), "worst pair is the deepest diagonal");
        assert!(
            report.grows_with_cap,
            "max {} at {:?} vs half-cap max {}",
            report.max_value, report.argmax, report.max_at_half_cap
        );
    }

    #[test]
    fn empirical_orbit_length_is_enforced() {
        let err = correlation_sum_empirical(&[1, 2, 3], 1, 1, 10).unwrap_err();
        match err {
            Error::InsufficientOrbit { required, .. } => assert_eq!(required, 1000),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn profile_csv_schema() {
        let profile = MixingProfile::asserted(1.0, 3);
        let csv = profile.to_csv();
        assert!(csv.starts_with("N,g,G,mode\n"));
        assert!(csv.contains("1,1,1,asserted"));
        assert!(csv.contains("3,1,3,asserted"));
    }
}
