//! Birkhoff sums, one-term trimming, exceedance counts, and the aggregated
//! sum over the truncation family.
//!
//! The trim indicator is 1 exactly when some value among the first N exceeds
//! the cutoff tau(N); trimming then removes the earliest occurrence of the
//! maximum and nothing else.

use std::fmt::Write as _;

use crate::dynamics::{RealInput, SystemModel};
use crate::error::{Error, Result};
use crate::mainterm::TailProfile;
use crate::stats;

/// One trimmed Birkhoff sum at a fixed horizon.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TrimmedSum {
    pub n: usize,
    pub raw_sum: f64,
    pub max_term: f64,
    /// Smallest index attaining the maximum (0 for an empty input).
    pub argmax: usize,
    /// 1 iff at least one value exceeds the threshold.
    pub delta: u8,
    /// #{k < N : value_k > threshold}.
    pub exceedances: usize,
    pub trimmed_sum: f64,
}

impl TrimmedSum {
    pub fn csv_header() -> &'static str {
        "seed,N,raw,max,argmax,delta,exceedances,trimmed"
    }

    pub fn csv_row(&self, seed: u64) -> String {
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},{},{},{}",
            seed,
            self.n,
            self.raw_sum,
            self.max_term,
            self.argmax,
            self.delta,
            self.exceedances,
            self.trimmed_sum
        )
        .expect("string write");
        row
    }
}

/// Exact Birkhoff sum of integer orbit values.
pub fn birkhoff_sum_exact(values: &[u64]) -> u128 {
    values.iter().map(|&v| v as u128).sum()
}

/// Compensated Birkhoff sum of non-negative values.
pub fn birkhoff_sum(values: &[f64]) -> Result<f64> {
    reject_negative(values)?;
    Ok(stats::neumaier_sum(values.iter().copied()))
}

fn reject_negative(values: &[f64]) -> Result<()> {
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeValue { value, index });
    }
    Ok(())
}

/// Trim a value sequence against a threshold: compute the raw sum, locate
/// the maximum (earliest occurrence), count exceedances, and remove at most
/// one term.
pub fn trim(values: &[f64], threshold: f64) -> Result<TrimmedSum> {
    reject_negative(values)?;
    if threshold < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "trim threshold must be non-negative, got {threshold}"
        )));
    }
    let raw_sum = stats::neumaier_sum(values.iter().copied());
    let mut max_term = 0.0f64;
    let mut argmax = 0usize;
    let mut exceedances = 0usize;
    for (i, &v) in values.iter().enumerate() {
        // strict comparison keeps the earliest occurrence on ties
        if i == 0 || v > max_term {
            max_term = v;
            argmax = i;
        }
        if v > threshold {
            exceedances += 1;
        }
    }
    let delta = u8::from(exceedances >= 1);
    let trimmed_sum = raw_sum - f64::from(delta) * max_term;
    Ok(TrimmedSum {
        n: values.len(),
        raw_sum,
        max_term,
        argmax,
        delta,
        exceedances,
        trimmed_sum,
    })
}

/// Trim integer orbit values with exact comparisons against the threshold.
pub fn trim_exact(values: &[u64], threshold: f64) -> TrimmedSum {
    debug_assert!(threshold >= 0.0);
    let cut = integer_cut(threshold);
    let raw = birkhoff_sum_exact(values);
    let mut max_term = 0u64;
    let mut argmax = 0usize;
    let mut exceedances = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > max_term {
            max_term = v;
            argmax = i;
        }
        if v > cut {
            exceedances += 1;
        }
    }
    let delta = u8::from(exceedances >= 1);
    let raw_sum = raw as f64;
    let trimmed_sum = raw_sum - f64::from(delta) * max_term as f64;
    TrimmedSum {
        n: values.len(),
        raw_sum,
        max_term: max_term as f64,
        argmax,
        delta,
        exceedances,
        trimmed_sum,
    }
}

/// Largest integer at or below the threshold: an integer value v exceeds the
/// threshold iff v > floor(threshold).
fn integer_cut(threshold: f64) -> u64 {
    if threshold >= u64::MAX as f64 {
        u64::MAX
    } else {
        threshold.floor() as u64
    }
}

/// Exact count of integer values above the threshold.
pub fn count_exceedances(values: &[u64], threshold: f64) -> usize {
    let cut = integer_cut(threshold);
    values.iter().filter(|&&v| v > cut).count()
}

/// Sum of the integer values at or below the threshold.
pub fn threshold_sum(values: &[u64], threshold: f64) -> f64 {
    let cut = integer_cut(threshold);
    values
        .iter()
        .filter(|&&v| v <= cut)
        .map(|&v| v as u128)
        .sum::<u128>() as f64
}

/// The aggregate sum over the truncation family at horizon N: the double sum
/// over the family members collapses to thresholding the orbit at tau(N), a
/// single O(N) pass.
pub fn phi_aggregate(
    system: &SystemModel,
    profile: &TailProfile,
    x: &mut RealInput,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "phi_aggregate requires N >= 2, got {n}"
        )));
    }
    let values = system.orbit_values(x, n, None)?;
    let tau = profile.tau(n)?;
    Ok(threshold_sum(&values, tau))
}

/// Exceedance counts #{k < N : f(T^k x) > tau(N)} for every grid horizon.
pub fn exceedance_curve(
    system: &SystemModel,
    profile: &TailProfile,
    x: &mut RealInput,
    grid: &[usize],
) -> Result<Vec<usize>> {
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.is_empty() || grid[0] < 2 || !increasing {
        return Err(Error::InvalidGrid {
            min: 2,
            got: grid.to_vec(),
        });
    }
    let max_n = *grid.last().unwrap();
    let values = system.orbit_values(x, max_n, None)?;
    grid.iter()
        .map(|&n| Ok(count_exceedances(&values[..n], profile.tau(n)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn birkhoff_examples() {
        assert_abs_diff_eq!(birkhoff_sum(&[3.0, 1.0, 4.0, 1.0, 5.0]).unwrap(), 14.0);
        assert_abs_diff_eq!(birkhoff_sum(&[]).unwrap(), 0.0);
        assert_eq!(birkhoff_sum_exact(&[3, 1, 4, 1, 5]), 14);
        assert!(birkhoff_sum(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn birkhoff_of_euclid_hook() {
        let mut x = RealInput::rational_str("415/93").unwrap();
        let orbit = crate::dynamics::gauss_digits(&mut x, 3, None).unwrap();
        assert_eq!(birkhoff_sum_exact(&orbit.values), 15);
    }

    #[test]
    fn trim_basic_example() {
        let t = trim(&[3.0, 1.0, 4.0, 1.0, 5.0], 4.0).unwrap();
        assert_abs_diff_eq!(t.raw_sum, 14.0);
        assert_abs_diff_eq!(t.max_term, 5.0);
        assert_eq!(t.argmax, 4);
        assert_eq!(t.exceedances, 1);
        assert_eq!(t.delta, 1);
        assert_abs_diff_eq!(t.trimmed_sum, 9.0);
    }

    #[test]
    fn trim_without_exceedance() {
        let t = trim(&[1.0, 1.0, 1.0], 10.0).unwrap();
        assert_eq!(t.delta, 0);
        assert_abs_diff_eq!(t.trimmed_sum, t.raw_sum);
        assert_abs_diff_eq!(t.trimmed_sum, 3.0);
    }

    #[test]
    fn trim_removes_one_of_tied_maxima() {
        let t = trim(&[7.0, 7.0], 6.0).unwrap();
        assert_eq!(t.exceedances, 2);
        assert_eq!(t.delta, 1);
        assert_eq!(t.argmax, 0);
        assert_abs_diff_eq!(t.trimmed_sum, 7.0);
    }

    #[test]
    fn trim_empty_input() {
        let t = trim(&[], 1.0).unwrap();
        assert_eq!(t.n, 0);
        assert_abs_diff_eq!(t.raw_sum, 0.0);
        assert_eq!(t.delta, 0);
    }

    #[test]
    fn trim_exact_matches_float_path() {
        let values = [3u64, 1, 4, 1, 5, 9, 2, 6];
        for threshold in [0.0, 2.5, 4.0, 5.0, 8.9, 100.0] {
            let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let a = trim_exact(&values, threshold);
            let b = trim(&floats, threshold).unwrap();
            assert_eq!(a, b, "threshold {threshold}");
        }
    }

    #[test]
    fn trim_identity_when_delta_one() {
        let t = trim(&[2.0, 9.0, 3.0], 5.0).unwrap();
        assert_abs_diff_eq!(t.trimmed_sum + t.max_term, t.raw_sum);
    }

    #[test]
    fn exceedance_threshold_monotonicity() {
        let values = [3u64, 1, 4, 1, 5, 9, 2, 6];
        let mut last = values.len();
        for threshold in [0.0, 1.0, 2.0, 4.5, 6.0, 9.0, 20.0] {
            let count = count_exceedances(&values, threshold);
            assert!(count <= last);
            last = count;
        }
    }

    #[test]
    fn threshold_sum_examples() {
        assert_abs_diff_eq!(threshold_sum(&[3, 1, 9], 5.0), 4.0);
        assert_abs_diff_eq!(threshold_sum(&[3, 1, 9], 9.0), 13.0);
    }

    #[test]
    fn aggregate_equals_raw_when_bounded() {
        let profile = TailProfile::weak_l1(0.5).unwrap();
        let system = SystemModel::doubling_indicator();
        let mut x = RealInput::seeded(11);
        let agg = phi_aggregate(&system, &profile, &mut x, 64).unwrap();
        let mut x2 = RealInput::seeded(11);
        let values = system.orbit_values(&mut x2, 64, None).unwrap();
        assert_abs_diff_eq!(agg, birkhoff_sum_exact(&values) as f64);
    }

    #[test]
    fn exceedance_curve_bounded_observable_is_zero() {
        let profile = TailProfile::weak_l1(0.5).unwrap();
        let system = SystemModel::doubling_indicator();
        let mut x = RealInput::seeded(5);
        let counts = exceedance_curve(&system, &profile, &mut x, &[2, 4, 16, 64]).unwrap();
        // tau(N) > 1 for every N >= 2, and the indicator is at most 1
        assert_eq!(counts, vec![0, 0, 0, 0]);
    }

    #[test]
    fn exceedance_curve_single_spike() {
        let values = [1000u64, 1, 1, 1, 1, 1, 1, 1];
        let profile = TailProfile::weak_l1(0.5).unwrap();
        for n in [2usize, 4, 8] {
            let tau = profile.tau(n).unwrap();
            if tau < 1000.0 {
                assert_eq!(count_exceedances(&values[..n], tau), 1);
            }
        }
    }

    #[test]
    fn csv_row_schema() {
        let t = trim(&[3.0, 1.0, 4.0, 1.0, 5.0], 4.0).unwrap();
        assert_eq!(TrimmedSum::csv_header(), "seed,N,raw,max,argmax,delta,exceedances,trimmed");
        assert_eq!(t.csv_row(7), "7,5,14,5,4,1,1,9");
    }
}
