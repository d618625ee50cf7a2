//! Small numeric helpers shared by the tables and the experiment harness.

use crate::error::{Error, Result};

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Linear-interpolation quantile (type 7) of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    assert!((0.0..=1.0).contains(&q));
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

/// Interquartile range q3 - q1.
pub fn iqr(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)
}

/// Least-squares power-law fit: slope of ln(magnitude) against ln(n).
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Fit ln y = intercept + slope * ln n over (n, magnitude) pairs.
/// Needs at least 3 pairs, positive magnitudes, and non-identical n.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    let usable = pairs.iter().filter(|(n, y)| *n > 0.0 && *y > 0.0).count();
    if usable < 3 || usable != pairs.len() {
        return Err(Error::DegenerateFit {
            required: 3,
            got: usable,
        });
    }
    let xs: Vec<f64> = pairs.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let x_mean = neumaier_sum(xs.iter().copied()) / n;
    let y_mean = neumaier_sum(ys.iter().copied()) / n;
    let sxx = neumaier_sum(xs.iter().map(|x| (x - x_mean) * (x - x_mean)));
    if sxx == 0.0 {
        return Err(Error::DegenerateFit {
            required: 3,
            got: 1,
        });
    }
    let sxy = neumaier_sum(
        xs.iter()
            .zip(ys.iter())
            .map(|(x, y)| (x - x_mean) * (y - y_mean)),
    );
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss = neumaier_sum(xs.iter().zip(ys.iter()).map(|(x, y)| {
        let e = y - (intercept + slope * x);
        e * e
    }));
    let dof = (xs.len() - 2) as f64;
    let slope_stderr = if dof > 0.0 { (rss / dof / sxx).sqrt() } else { 0.0 };
    Ok(ExponentFit {
        slope,
        intercept,
        slope_stderr,
    })
}
