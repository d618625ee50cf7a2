//! Truncation cutoffs, truncated moments, and the main-term bookkeeping
//! tables behind the trimmed-sum error analysis.
//!
//! The weak-integrability profile is the power-log family
//! phi(lambda) = lambda^p * ln(e + lambda)^q with p > 0, and the cutoff at
//! horizon N is tau(N) = phi^{-1}(N * ln(N)^{1/2 + epsilon}). Tables carry
//! the truncated first and second moments F1, F2, the cumulative mixing sum
//! G, and the combined bound F3 = F1^2 * (N + G) + F2.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{SystemModel, LN_2};
use crate::error::{Error, Result};
use crate::mixing::MixingModel;
use crate::stats;

const TAU_REL_TOL: f64 = 1e-12;
const TAU_MAX_ITERS: usize = 20_000;

/// Weak-integrability tail profile.
#[derive(Clone, Debug, Serialize)]
pub struct TailProfile {
    p: f64,
    q: f64,
    epsilon: f64,
    /// Optional certified weak-norm bound K_phi(f), carried as metadata.
    k_phi: Option<f64>,
}

impl TailProfile {
    pub fn new(p: f64, q: f64, epsilon: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "need p > 0 and finite q, got p={p}, q={q}"
            )));
        }
        if p + q < 0.0 {
            // keeps phi strictly increasing on all of [0, inf)
            return Err(Error::InvalidProfile(format!(
                "need p + q >= 0 for a monotone profile, got p={p}, q={q}"
            )));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "need epsilon > 0, got {epsilon}"
            )));
        }
        Ok(TailProfile {
            p,
            q,
            epsilon,
            k_phi: None,
        })
    }

    /// The weak-L1 profile phi(lambda) = lambda.
    pub fn weak_l1(epsilon: f64) -> Result<Self> {
        TailProfile::new(1.0, 0.0, epsilon)
    }

    pub fn with_weak_norm_bound(mut self, k_phi: f64) -> Self {
        self.k_phi = Some(k_phi);
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn weak_norm_bound(&self) -> Option<f64> {
        self.k_phi
    }

    /// phi(lambda) = lambda^p * ln(e + lambda)^q.
    pub fn phi(&self, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return 0.0;
        }
        lambda.powf(self.p) * (std::f64::consts::E + lambda).ln().powf(self.q)
    }

    /// The cutoff target N * ln(N)^(1/2 + epsilon).
    pub fn cutoff_target(&self, n: usize) -> f64 {
        let nf = n as f64;
        nf * nf.ln().powf(0.5 + self.epsilon)
    }

    /// tau(N) = phi^{-1}(N * ln(N)^(1/2+epsilon)), by monotone bisection to
    /// relative tolerance 1e-12. Requires N >= 2 so the target is positive.
    pub fn tau(&self, n: usize) -> Result<f64> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "tau requires N >= 2, got {n}"
            )));
        }
        let target = self.cutoff_target(n);
        let mut hi = 1.0f64;
        let mut iters = 0usize;
        while self.phi(hi) < target {
            hi *= 2.0;
            iters += 1;
            if iters > 1100 {
                return Err(Error::Nonconvergence {
                    target,
                    iterations: iters,
                });
            }
        }
        let mut lo = 0.0f64;
        while hi - lo > TAU_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break; // f64 resolution reached
            }
            if self.phi(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
            if iters > TAU_MAX_ITERS {
                return Err(Error::Nonconvergence {
                    target,
                    iterations: iters,
                });
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// mu_g{a_1 = n} = (1/log 2) * log(1 + 1/(n(n+2))).
pub fn gauss_digit_probability(n: u64) -> f64 {
    let x = n as f64;
    (1.0 / (x * (x + 2.0))).ln_1p() / LN_2
}

/// A truncated moment together with its tracked truncation tail. All
/// supported systems enumerate their cells below the threshold completely,
/// so the tail bound is zero; it is carried so table construction can refuse
/// tables whose tail would matter.
#[derive(Clone, Copy, Debug)]
pub struct Moment {
    pub value: f64,
    pub tail_bound: f64,
}

/// Integral of f^k over {f <= threshold}: sum of alpha_i^k * mu(A_i) over
/// cells with value at most the threshold. `power` must be 1 or 2.
pub fn truncated_moment(system: &SystemModel, threshold: f64, power: u32) -> Result<Moment> {
    if !(power == 1 || power == 2) {
        return Err(Error::InvalidConfig(format!(
            "truncated_moment supports powers 1 and 2, got {power}"
        )));
    }
    if threshold < 0.0 || !threshold.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "threshold must be finite and non-negative, got {threshold}"
        )));
    }
    let value = stats::neumaier_sum(system.cells_below(threshold).map(|(v, m)| {
        if power == 1 {
            v * m
        } else {
            v * v * m
        }
    }));
    Ok(Moment {
        value,
        tail_bound: 0.0,
    })
}

/// Per-N main-term and error-term bookkeeping over an increasing N grid.
#[derive(Clone, Debug, Serialize)]
pub struct MainTermTable {
    pub grid: Vec<usize>,
    pub tau: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub g: Vec<f64>,
    pub f3: Vec<f64>,
    pub profile_p: f64,
    pub profile_q: f64,
    pub epsilon: f64,
}

impl MainTermTable {
    /// Assemble a table from already-computed columns (used for synthetic
    /// and adversarial tables). F3 is computed exactly as
    /// F1^2 * (N + G) + F2.
    pub fn from_columns(
        grid: Vec<usize>,
        tau: Vec<f64>,
        f1: Vec<f64>,
        f2: Vec<f64>,
        g: Vec<f64>,
        profile: &TailProfile,
    ) -> Self {
        let f3 = grid
            .iter()
            .zip(f1.iter().zip(f2.iter().zip(g.iter())))
            .map(|(&n, (&f1, (&f2, &g)))| f1 * f1 * (n as f64 + g) + f2)
            .collect();
        MainTermTable {
            grid,
            tau,
            f1,
            f2,
            g,
            f3,
            profile_p: profile.p(),
            profile_q: profile.q(),
            epsilon: profile.epsilon(),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Row lookup by N.
    pub fn row(&self, n: usize) -> Option<MainTermRow> {
        let i = self.grid.iter().position(|&g| g == n)?;
        Some(MainTermRow {
            n,
            tau: self.tau[i],
            f1: self.f1[i],
            f2: self.f2[i],
            g: self.g[i],
            f3: self.f3[i],
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,F1,F2,G,F3,tau\n");
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.grid[i], self.f1[i], self.f2[i], self.g[i], self.f3[i], self.tau[i]
            )
            .expect("string write");
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
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MainTermRow {
    pub n: usize,
    pub tau: f64,
    pub f1: f64,
    pub f2: f64,
    pub g: f64,
    pub f3: f64,
}

fn validate_grid(grid: &[usize]) -> Result<()> {
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.is_empty() || grid[0] < 2 || !increasing {
        return Err(Error::InvalidGrid {
            min: 2,
            got: grid.to_vec(),
        });
    }
    Ok(())
}

/// Build the F1/F2/G/F3 table for `system` over an increasing grid.
///
/// Integer-valued unbounded observables (Gauss digits, reciprocal floors)
/// are accumulated incrementally across grid points, so consecutive grids
/// cost one pass over the cells below the largest cutoff.
pub fn build_main_terms(
    system: &SystemModel,
    profile: &TailProfile,
    g_model: &MixingModel,
    grid: &[usize],
) -> Result<MainTermTable> {
    validate_grid(grid)?;
    let mut taus = Vec::with_capacity(grid.len());
    let mut f1 = Vec::with_capacity(grid.len());
    let mut f2 = Vec::with_capacity(grid.len());
    let mut g = Vec::with_capacity(grid.len());

    let incremental = matches!(
        system.observable,
        crate::dynamics::ObservableKind::GaussDigit | crate::dynamics::ObservableKind::ReciprocalFloor
    );
    let mut cursor: u64 = 0; // largest cell already accumulated
    let mut s1 = 0.0f64;
    let mut s2 = 0.0f64;

    for &n in grid {
        let tau = profile.tau(n)?;
        taus.push(tau);
        let (m1, m2) = if incremental {
            let top = tau.floor() as u64;
            while cursor < top {
                cursor += 1;
                let v = cursor as f64;
                let mass = match system.observable {
                    crate::dynamics::ObservableKind::GaussDigit => {
                        gauss_digit_probability(cursor)
                    }
                    _ => 1.0 / (v * (v + 1.0)),
                };
                s1 += v * mass;
                s2 += v * v * mass;
            }
            (
                Moment {
                    value: s1,
                    tail_bound: 0.0,
                },
                Moment {
                    value: s2,
                    tail_bound: 0.0,
                },
            )
        } else {
            (
                truncated_moment(system, tau, 1)?,
                truncated_moment(system, tau, 2)?,
            )
        };
        for m in [&m1, &m2] {
            if m.tail_bound > 1e-6 * m.value.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::TruncationTail {
                    tail: m.tail_bound,
                    moment: m.value,
                    threshold: tau,
                });
            }
        }
        f1.push(m1.value);
        f2.push(m2.value);
        g.push(g_model.cumulative(n));
    }
    Ok(MainTermTable::from_columns(
        grid.to_vec(),
        taus,
        f1,
        f2,
        g,
        profile,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Consistent => write!(f, "consistent"),
            Verdict::Inconsistent => write!(f, "inconsistent"),
        }
    }
}

/// Ratio sequences for the growth condition
/// (N+1)F1(N+1) - N F1(N) << F3(N+1) - F3(N) << F3(N)^(2/3).
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub grid: Vec<usize>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub max_r1: f64,
    pub max_r2: f64,
    pub slope_r1: f64,
    pub slope_r2: f64,
    pub verdict: Verdict,
}

/// Bounded-ratio evidence for the growth hypothesis over a consecutive grid.
/// The verdict is heuristic: both ratio sequences must show no growth trend
/// (log-log slope at most 0.05).
pub fn check_growth_hypothesis(table: &MainTermTable) -> Result<GrowthReport> {
    if table.len() < 4 {
        return Err(Error::InvalidConfig(
            "growth check needs at least 4 consecutive grid points".into(),
        ));
    }
    if !table.grid.windows(2).all(|w| w[1] == w[0] + 1) {
        return Err(Error::InvalidConfig(
            "growth check requires a grid of consecutive integers".into(),
        ));
    }
    let mut r1 = Vec::with_capacity(table.len() - 1);
    let mut r2 = Vec::with_capacity(table.len() - 1);
    for i in 0..table.len() - 1 {
        let n = table.grid[i] as f64;
        let df3 = table.f3[i + 1] - table.f3[i];
        if df3 <= 0.0 {
            return Err(Error::FlatMainTerm { n: table.grid[i] });
        }
        let dnf1 = (n + 1.0) * table.f1[i + 1] - n * table.f1[i];
        r1.push(dnf1 / df3);
        r2.push(df3 / table.f3[i].powf(2.0 / 3.0));
    }
    let grid_f: Vec<f64> = table.grid[..table.len() - 1]
        .iter()
        .map(|&n| n as f64)
        .collect();
    let fit1 = stats::fit_exponent(&pairs(&grid_f, &r1))?;
    let fit2 = stats::fit_exponent(&pairs(&grid_f, &r2))?;
    let max_r1 = r1.iter().copied().fold(f64::MIN, f64::max);
    let max_r2 = r2.iter().copied().fold(f64::MIN, f64::max);
    let verdict = if fit1.slope <= 0.05 && fit2.slope <= 0.05 {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(GrowthReport {
        grid: table.grid[..table.len() - 1].to_vec(),
        r1,
        r2,
        max_r1,
        max_r2,
        slope_r1: fit1.slope,
        slope_r2: fit2.slope,
        verdict,
    })
}

fn pairs(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().copied().zip(ys.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixing::MixingModel;
    use approx::assert_abs_diff_eq;

    fn weak_l1() -> TailProfile {
        TailProfile::weak_l1(0.5).unwrap()
    }

    #[test]
    fn tau_identity_profile() {
        // phi = id, eps = 0.5: tau(10) = 10 ln 10
        let t = weak_l1().tau(10).unwrap();
        assert_abs_diff_eq!(t, 10.0 * 10f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn tau_square_profile() {
        let profile = TailProfile::new(2.0, 0.0, 0.5).unwrap();
        let t = profile.tau(10).unwrap();
        assert_abs_diff_eq!(t, (10.0 * 10f64.ln()).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn tau_monotone_in_n() {
        let p = weak_l1();
        assert!(p.tau(2).unwrap() < p.tau(3).unwrap());
    }

    #[test]
    fn tau_phi_roundtrip_across_family() {
        for (pp, qq) in [(1.0, 0.0), (2.0, 0.0), (1.0, 1.0), (0.5, 0.25), (1.5, -1.0)] {
            let profile = TailProfile::new(pp, qq, 0.5).unwrap();
            for n in [2usize, 5, 17, 1000, 100_000] {
                let tau = profile.tau(n).unwrap();
                let target = profile.cutoff_target(n);
                assert!(
                    (profile.phi(tau) - target).abs() <= 1e-9 * target,
                    "phi(tau) != target for p={pp}, q={qq}, N={n}"
                );
            }
        }
    }

    #[test]
    fn tau_requires_n_at_least_two() {
        assert!(weak_l1().tau(1).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(TailProfile::new(0.0, 0.0, 0.5).is_err());
        assert!(TailProfile::new(1.0, -2.0, 0.5).is_err());
        assert!(TailProfile::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn digit_probability_values() {
        assert_abs_diff_eq!(gauss_digit_probability(1), 0.415_037_499_278_843_8, epsilon = 1e-12);
        assert_abs_diff_eq!(gauss_digit_probability(2), 0.169_925_001_442_312_4, epsilon = 1e-12);
    }

    #[test]
    fn digit_probabilities_telescope_to_one() {
        let sum = stats::neumaier_sum((1..=1_000_000u64).map(gauss_digit_probability));
        assert!((sum - 1.0).abs() <= 3e-6, "normalization off: {sum}");
    }

    #[test]
    fn truncated_moment_gauss_small() {
        let sys = SystemModel::gauss();
        let m = truncated_moment(&sys, 3.0, 1).unwrap();
        let expect = (f64::ln(4.0 / 3.0) + 2.0 * f64::ln(9.0 / 8.0) + 3.0 * f64::ln(16.0 / 15.0))
            / LN_2;
        assert_abs_diff_eq!(m.value, expect, epsilon = 1e-12);
        assert_eq!(m.tail_bound, 0.0);
    }

    #[test]
    fn truncated_moment_zero_threshold() {
        for sys in [SystemModel::gauss(), SystemModel::doubling_indicator()] {
            assert_eq!(truncated_moment(&sys, 0.0, 1).unwrap().value, 0.0);
            assert_eq!(truncated_moment(&sys, 0.0, 2).unwrap().value, 0.0);
        }
    }

    #[test]
    fn truncated_moment_reciprocal_proxy() {
        let sys = SystemModel::doubling_reciprocal();
        let m = truncated_moment(&sys, 2.0, 1).unwrap();
        assert_abs_diff_eq!(m.value, 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn moment_monotone_in_threshold() {
        let sys = SystemModel::gauss();
        let mut last = 0.0;
        for thr in [0.0, 1.0, 2.5, 10.0, 100.0, 5000.0] {
            let m = truncated_moment(&sys, thr, 1).unwrap().value;
            assert!(m >= last);
            last = m;
        }
    }

    #[test]
    fn table_assembly_identity() {
        // F1 = 1, F2 = 2, G = 0 at N = 3 gives F3 = 1*(3+0)+2 = 5
        let profile = weak_l1();
        let table = MainTermTable::from_columns(
            vec![3],
            vec![0.0],
            vec![1.0],
            vec![2.0],
            vec![0.0],
            &profile,
        );
        assert_abs_diff_eq!(table.f3[0], 5.0);
    }

    #[test]
    fn constant_g_cumulates_linearly() {
        let model = MixingModel::Constant(2.5);
        assert_abs_diff_eq!(model.cumulative(4), 10.0);
    }

    #[test]
    fn build_table_matches_direct_summation_oracle() {
        let sys = SystemModel::gauss();
        let profile = weak_l1();
        let model = MixingModel::Constant(1.0);
        let table = build_main_terms(&sys, &profile, &model, &[1000]).unwrap();
        let tau = profile.tau(1000).unwrap();
        // independent oracle: direct loop over the digit law
        let mut direct = 0.0;
        let mut n = 1u64;
        while (n as f64) <= tau {
            direct += n as f64 * gauss_digit_probability(n);
            n += 1;
        }
        assert!((table.f1[0] - direct).abs() < 1e-3);
        assert_abs_diff_eq!(table.g[0], 1000.0);
        assert_abs_diff_eq!(
            table.f3[0],
            table.f1[0] * table.f1[0] * 2000.0 + table.f2[0],
            epsilon = 1e-12
        );
    }

    #[test]
    fn table_monotone_and_cauchy_schwarz() {
        let sys = SystemModel::gauss();
        let profile = weak_l1();
        let model = MixingModel::Constant(1.0);
        let grid = [2, 3, 5, 10, 100, 1000, 10_000];
        let table = build_main_terms(&sys, &profile, &model, &grid).unwrap();
        for i in 0..table.len() {
            assert!(table.f2[i] >= table.f1[i] * table.f1[i], "F2 >= F1^2 at {i}");
            if i > 0 {
                assert!(table.f1[i] >= table.f1[i - 1]);
                assert!(table.f2[i] >= table.f2[i - 1]);
                assert!(table.f3[i] >= table.f3[i - 1]);
            }
        }
    }

    #[test]
    fn gauss_first_moment_tracks_log2_tau() {
        let sys = SystemModel::gauss();
        let profile = weak_l1();
        let model = MixingModel::Constant(1.0);
        let grid = [100, 1000, 10_000, 100_000];
        let table = build_main_terms(&sys, &profile, &model, &grid).unwrap();
        for i in 0..table.len() {
            let predicted = table.tau[i].log2();
            assert!(
                (table.f1[i] - predicted).abs() <= 2.0,
                "F1({}) = {} vs log2 tau = {}",
                table.grid[i],
                table.f1[i],
                predicted
            );
        }
    }

    #[test]
    fn growth_check_constant_f1_is_consistent() {
        let profile = weak_l1();
        let grid: Vec<usize> = (2..200).collect();
        let tau: Vec<f64> = grid.iter().map(|_| 0.0).collect();
        let f1: Vec<f64> = grid.iter().map(|_| 0.5).collect();
        let f2: Vec<f64> = grid.iter().map(|_| 0.5).collect();
        let g: Vec<f64> = grid.iter().map(|&n| n as f64).collect(); // g = 1
        let table = MainTermTable::from_columns(grid, tau, f1, f2, g, &profile);
        let report = check_growth_hypothesis(&table).unwrap();
        assert_eq!(report.verdict, Verdict::Consistent);
    }

    #[test]
    fn growth_check_adversarial_jump_is_inconsistent() {
        // F2 jumps by F3^0.9 at every step, so dF3 / F3^(2/3) grows
        let profile = weak_l1();
        let grid: Vec<usize> = (2..120).collect();
        let f1: Vec<f64> = grid.iter().map(|_| 1.0).collect();
        let g: Vec<f64> = grid.iter().map(|_| 0.0).collect();
        let mut f2 = Vec::with_capacity(grid.len());
        let mut current_f2 = 1.0f64;
        for &n in &grid {
            f2.push(current_f2);
            let f3 = 1.0 * (n as f64) + current_f2;
            current_f2 += f3.powf(0.9);
        }
        let tau = vec![0.0; grid.len()];
        let table = MainTermTable::from_columns(grid, tau, f1, f2, g, &profile);
        let report = check_growth_hypothesis(&table).unwrap();
        assert_eq!(report.verdict, Verdict::Inconsistent);
        assert!(report.slope_r2 > 0.05);
    }

    #[test]
    fn growth_check_flags_flat_f3() {
        let profile = weak_l1();
        let grid: Vec<usize> = (2..10).collect();
        let f1 = vec![1.0; grid.len()];
        let f2 = vec![1.0; grid.len()];
        let g: Vec<f64> = grid.iter().map(|&n| -(n as f64)).collect(); // N + G = 0
        let tau = vec![0.0; grid.len()];
        let table = MainTermTable::from_columns(grid, tau, f1, f2, g, &profile);
        match check_growth_hypothesis(&table) {
            Err(Error::FlatMainTerm { .. }) => {}
            other => panic!("expected FlatMainTerm, got {other:?}"),
        }
    }

    #[test]
    fn csv_schema() {
        let profile = weak_l1();
        let table = MainTermTable::from_columns(
            vec![3],
            vec![1.5],
            vec![1.0],
            vec![2.0],
            vec![0.0],
            &profile,
        );
        let csv = table.to_csv();
        assert!(csv.starts_with("N,F1,F2,G,F3,tau\n"));
        assert!(csv.contains("3,1,2,0,5,1.5"));
    }

    #[test]
    fn grid_validation() {
        let sys = SystemModel::gauss();
        let profile = weak_l1();
        let model = MixingModel::Constant(1.0);
        assert!(build_main_terms(&sys, &profile, &model, &[1, 2]).is_err());
        assert!(build_main_terms(&sys, &profile, &model, &[5, 5]).is_err());
        assert!(build_main_terms(&sys, &profile, &model, &[]).is_err());
    }
}
