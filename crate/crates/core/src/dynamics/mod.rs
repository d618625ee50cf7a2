//! Symbolic systems and exact orbit generation.
//!
//! Three measure-preserving systems are supported: the Gauss map with the
//! continued-fraction digit observable, the doubling map with either the
//! reciprocal-floor observable or the half-interval indicator, and
//! finite-state Markov shifts with exact rational transition matrices.
//! Measures are supplied in closed form; nothing here discovers an invariant
//! measure.

mod doubling;
mod gauss;
mod real;
mod surd;

pub use doubling::doubling_orbit;
pub use gauss::{convergent, cylinder_interval, default_bit_budget, gauss_digits};
pub use real::{parse_rational, LazyUniformReal, RealInput};
pub use surd::QuadSurd;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Natural log of 2, the normalizing constant of the Gauss measure.
pub const LN_2: f64 = std::f64::consts::LN_2;

/// A symbolic orbit: cell indices, observable values, and an exactness flag.
///
/// For the Gauss map symbols and values coincide (the digit is the
/// observable). For the doubling map the symbols are the binary digits while
/// the values are the reciprocal floors, whose level sets refine the binary
/// partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDigits {
    pub symbols: Vec<u64>,
    pub values: Vec<u64>,
    pub exact: bool,
}

/// Uniform sample of (0,1), replayable from its seed.
pub fn sample_real(seed: u64) -> LazyUniformReal {
    LazyUniformReal::new(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SystemKind {
    Gauss,
    Doubling,
    Markov,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemKind::Gauss => write!(f, "gauss"),
            SystemKind::Doubling => write!(f, "doubling"),
            SystemKind::Markov => write!(f, "markov"),
        }
    }
}

/// The observable f, constant on partition cells.
#[derive(Clone, Debug)]
pub enum ObservableKind {
    /// f(x) = a_1(x): cell n (n >= 1) carries value n.
    GaussDigit,
    /// f(x) = floor(1/x): cell n (n >= 1) is (1/(n+1), 1/n] with value n.
    ReciprocalFloor,
    /// f = 1 on [0,1/2), 0 on [1/2,1): cells indexed by the leading bit.
    IndicatorHalf,
    /// Per-state values for a Markov shift.
    CellValues(Vec<f64>),
}

/// A measure-preserving symbolic system together with its observable.
#[derive(Clone, Debug)]
pub struct SystemModel {
    pub kind: SystemKind,
    pub observable: ObservableKind,
    markov: Option<MarkovChain>,
    doubling_level: usize,
}

impl SystemModel {
    /// Gauss map with the digit observable.
    pub fn gauss() -> Self {
        SystemModel {
            kind: SystemKind::Gauss,
            observable: ObservableKind::GaussDigit,
            markov: None,
            doubling_level: 1,
        }
    }

    /// Doubling map with the reciprocal-floor observable.
    pub fn doubling_reciprocal() -> Self {
        SystemModel {
            kind: SystemKind::Doubling,
            observable: ObservableKind::ReciprocalFloor,
            markov: None,
            doubling_level: 1,
        }
    }

    /// Doubling map with the half-interval indicator observable.
    pub fn doubling_indicator() -> Self {
        SystemModel {
            kind: SystemKind::Doubling,
            observable: ObservableKind::IndicatorHalf,
            markov: None,
            doubling_level: 1,
        }
    }

    /// Partition level used when enumerating doubling cylinders as mixing
    /// cells (cells are the 2^level dyadic words).
    pub fn with_doubling_level(mut self, level: usize) -> Self {
        self.doubling_level = level.max(1);
        self
    }

    pub fn doubling_level(&self) -> usize {
        self.doubling_level
    }

    /// Markov shift from an exact stochastic matrix and non-negative
    /// per-state observable values; the stationary distribution is solved
    /// exactly.
    pub fn markov(matrix: Vec<Vec<BigRational>>, values: Vec<f64>) -> Result<Self> {
        let chain = MarkovChain::new(matrix)?;
        if values.len() != chain.len() {
            return Err(Error::InvalidMarkov(format!(
                "{} observable values for {} states",
                values.len(),
                chain.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidMarkov(format!(
                "observable values must be finite and non-negative, got {v}"
            )));
        }
        Ok(SystemModel {
            kind: SystemKind::Markov,
            observable: ObservableKind::CellValues(values),
            markov: Some(chain),
            doubling_level: 1,
        })
    }

    pub fn markov_chain(&self) -> Option<&MarkovChain> {
        self.markov.as_ref()
    }

    /// mu(A_i) for the observable's cell partition, at working precision.
    pub fn cell_measure(&self, cell: usize) -> Result<f64> {
        match &self.observable {
            ObservableKind::GaussDigit => {
                if cell == 0 {
                    return Err(self.invalid_cell(cell));
                }
                Ok(crate::mainterm::gauss_digit_probability(cell as u64))
            }
            ObservableKind::ReciprocalFloor => {
                if cell == 0 {
                    return Err(self.invalid_cell(cell));
                }
                let n = cell as f64;
                Ok(1.0 / (n * (n + 1.0)))
            }
            ObservableKind::IndicatorHalf => {
                if cell > 1 {
                    return Err(self.invalid_cell(cell));
                }
                Ok(0.5)
            }
            ObservableKind::CellValues(_) => {
                let chain = self.markov.as_ref().expect("markov system");
                let pi = chain
                    .stationary
                    .get(cell)
                    .ok_or_else(|| self.invalid_cell(cell))?;
                Ok(pi.to_f64().unwrap_or(f64::NAN))
            }
        }
    }

    /// The observable's constant value on a cell.
    pub fn observable_value(&self, cell: usize) -> Result<f64> {
        match &self.observable {
            ObservableKind::GaussDigit | ObservableKind::ReciprocalFloor => {
                if cell == 0 {
                    return Err(self.invalid_cell(cell));
                }
                Ok(cell as f64)
            }
            ObservableKind::IndicatorHalf => match cell {
                0 => Ok(1.0),
                1 => Ok(0.0),
                _ => Err(self.invalid_cell(cell)),
            },
            ObservableKind::CellValues(values) => values
                .get(cell)
                .copied()
                .ok_or_else(|| self.invalid_cell(cell)),
        }
    }

    /// (value, measure) over all cells with value <= threshold, in ascending
    /// value order. The enumerations are complete (closed-form measures), so
    /// the truncation tail is identically zero for every supported system.
    pub fn cells_below(&self, threshold: f64) -> Box<dyn Iterator<Item = (f64, f64)> + '_> {
        if threshold < 0.0 {
            return Box::new(std::iter::empty());
        }
        match &self.observable {
            ObservableKind::GaussDigit => {
                let top = threshold.floor() as u64;
                Box::new(
                    (1..=top).map(|n| (n as f64, crate::mainterm::gauss_digit_probability(n))),
                )
            }
            ObservableKind::ReciprocalFloor => {
                let top = threshold.floor() as u64;
                Box::new((1..=top).map(|n| {
                    let x = n as f64;
                    (x, 1.0 / (x * (x + 1.0)))
                }))
            }
            ObservableKind::IndicatorHalf => Box::new(
                [(1.0, 0.5), (0.0, 0.5)]
                    .into_iter()
                    .filter(move |(v, _)| *v <= threshold),
            ),
            ObservableKind::CellValues(values) => {
                let chain = self.markov.as_ref().expect("markov system");
                let mut cells: Vec<(f64, f64)> = values
                    .iter()
                    .zip(chain.stationary.iter())
                    .filter(|(v, _)| **v <= threshold)
                    .map(|(v, pi)| (*v, pi.to_f64().unwrap_or(f64::NAN)))
                    .collect();
                cells.sort_by(|a, b| a.0.total_cmp(&b.0));
                Box::new(cells.into_iter())
            }
        }
    }

    /// The integral of f where it exists (bounded / L^2 observables).
    pub fn integral(&self) -> Option<f64> {
        match &self.observable {
            ObservableKind::GaussDigit | ObservableKind::ReciprocalFloor => None,
            ObservableKind::IndicatorHalf => Some(0.5),
            ObservableKind::CellValues(values) => {
                let chain = self.markov.as_ref()?;
                Some(
                    values
                        .iter()
                        .zip(chain.stationary.iter())
                        .map(|(v, pi)| v * pi.to_f64().unwrap_or(f64::NAN))
                        .sum(),
                )
            }
        }
    }

    /// Observable values along the orbit of `x`, exact.
    pub fn orbit_values(&self, x: &mut RealInput, n: usize, budget: Option<u64>) -> Result<Vec<u64>> {
        match (&self.kind, &self.observable) {
            (SystemKind::Gauss, ObservableKind::GaussDigit) => {
                Ok(gauss_digits(x, n, budget)?.values)
            }
            (SystemKind::Doubling, ObservableKind::ReciprocalFloor) => {
                Ok(doubling_orbit(x, n, budget)?.values)
            }
            (SystemKind::Doubling, ObservableKind::IndicatorHalf) => Ok(doubling_orbit(x, n, budget)?
                .symbols
                .iter()
                .map(|&b| 1 - b)
                .collect()),
            _ => Err(Error::InvalidConfig(format!(
                "orbit generation is not supported for {} with this observable",
                self.kind
            ))),
        }
    }

    /// Truncated cell-measure table with its tracked tail mass. The measures
    /// plus the tail sum to 1 (exactly for finite partitions, within 1e-12
    /// for truncated countable ones).
    pub fn measure_table(&self, i_max: usize) -> MeasureTable {
        match &self.observable {
            ObservableKind::GaussDigit => {
                let measures: Vec<f64> = (1..=i_max as u64)
                    .map(crate::mainterm::gauss_digit_probability)
                    .collect();
                // mu{a_1 > I} = mu_g((0, 1/(I+1)))
                let tail = (1.0 / (i_max as f64 + 1.0)).ln_1p() / LN_2;
                MeasureTable {
                    first_cell: 1,
                    measures,
                    tail,
                }
            }
            ObservableKind::ReciprocalFloor => {
                let measures: Vec<f64> = (1..=i_max)
                    .map(|n| {
                        let x = n as f64;
                        1.0 / (x * (x + 1.0))
                    })
                    .collect();
                MeasureTable {
                    first_cell: 1,
                    measures,
                    tail: 1.0 / (i_max as f64 + 1.0),
                }
            }
            ObservableKind::IndicatorHalf => MeasureTable {
                first_cell: 0,
                measures: vec![0.5, 0.5],
                tail: 0.0,
            },
            ObservableKind::CellValues(_) => {
                let chain = self.markov.as_ref().expect("markov system");
                MeasureTable {
                    first_cell: 0,
                    measures: chain
                        .stationary
                        .iter()
                        .map(|pi| pi.to_f64().unwrap_or(f64::NAN))
                        .collect(),
                    tail: 0.0,
                }
            }
        }
    }

    fn invalid_cell(&self, cell: usize) -> Error {
        Error::InvalidCell {
            cell,
            system: self.kind.to_string(),
        }
    }
}

/// Truncated measure table; `tail` is the tracked mass beyond the last cell.
#[derive(Clone, Debug)]
pub struct MeasureTable {
    pub first_cell: usize,
    pub measures: Vec<f64>,
    pub tail: f64,
}

impl MeasureTable {
    pub fn total_with_tail(&self) -> f64 {
        crate::stats::neumaier_sum(self.measures.iter().copied()) + self.tail
    }
}

/// Finite-state shift with exact rational transition matrix and its exactly
/// solved stationary distribution.
#[derive(Clone, Debug)]
pub struct MarkovChain {
    pub transition: Vec<Vec<BigRational>>,
    pub stationary: Vec<BigRational>,
}

impl MarkovChain {
    pub fn new(matrix: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::InvalidMarkov("empty matrix".into()));
        }
        let one = BigRational::one();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMarkov(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| p.is_negative()) {
                return Err(Error::InvalidMarkov(format!("row {i} has a negative entry")));
            }
            let sum: BigRational = row.iter().sum();
            if sum != one {
                return Err(Error::InvalidMarkov(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        let stationary = solve_stationary(&matrix)?;
        Ok(MarkovChain {
            transition: matrix,
            stationary,
        })
    }

    pub fn len(&self) -> usize {
        self.transition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transition.is_empty()
    }

    /// Entry (i, j) of the n-th matrix power, exact.
    pub fn power_entry(&self, n: usize, i: usize, j: usize) -> BigRational {
        let size = self.len();
        let mut row: Vec<BigRational> = (0..size)
            .map(|c| {
                if c == i {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        for _ in 0..n {
            let mut next = vec![BigRational::zero(); size];
            for (s, weight) in row.iter().enumerate() {
                if weight.is_zero() {
                    continue;
                }
                for (t, p) in self.transition[s].iter().enumerate() {
                    if !p.is_zero() {
                        next[t] += weight * p;
                    }
                }
            }
            row = next;
        }
        row[j].clone()
    }
}

/// Solve pi M = pi with sum(pi) = 1 by exact Gaussian elimination.
fn solve_stationary(matrix: &[Vec<BigRational>]) -> Result<Vec<BigRational>> {
    let n = matrix.len();
    // rows 0..n-1: (M^T - I) pi = 0 (drop one redundant row); final row: sum = 1
    let mut a: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for col in 0..n.saturating_sub(1) {
        let mut row: Vec<BigRational> = (0..n).map(|r| matrix[r][col].clone()).collect();
        row[col] -= BigRational::one();
        row.push(BigRational::zero());
        a.push(row);
    }
    a.push(vec![BigRational::one(); n + 1]);

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidMarkov("no unique stationary distribution".into()))?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for entry in a[col].iter_mut() {
            *entry /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..=n {
                    let delta = &factor * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    let pi: Vec<BigRational> = (0..n).map(|r| a[r][n].clone()).collect();
    if pi.iter().any(|p| p.is_negative()) {
        return Err(Error::InvalidMarkov(
            "stationary solution has negative mass".into(),
        ));
    }
    Ok(pi)
}

/// Exact or working-precision measure of a cylinder set.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureValue {
    Exact(BigRational),
    Approx(f64),
}

impl MeasureValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MeasureValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            MeasureValue::Approx(v) => *v,
        }
    }
}

/// Measure of the cylinder determined by a symbol word: exact dyadic mass for
/// the doubling map, exact path mass for Markov shifts, and the Gauss measure
/// of the digit cylinder interval for the Gauss map.
pub fn cylinder_measure(system: &SystemModel, word: &[u64]) -> Result<MeasureValue> {
    match system.kind {
        SystemKind::Doubling => {
            if let Some(&bad) = word.iter().find(|&&s| s > 1) {
                return Err(Error::InvalidSymbol {
                    symbol: bad,
                    system: "doubling".into(),
                });
            }
            Ok(MeasureValue::Exact(BigRational::new(
                BigInt::one(),
                BigInt::one() << word.len(),
            )))
        }
        SystemKind::Markov => {
            let chain = system.markov.as_ref().expect("markov system");
            let states = chain.len() as u64;
            if let Some(&bad) = word.iter().find(|&&s| s >= states) {
                return Err(Error::InvalidSymbol {
                    symbol: bad,
                    system: "markov".into(),
                });
            }
            if word.is_empty() {
                return Ok(MeasureValue::Exact(BigRational::one()));
            }
            let mut mass = chain.stationary[word[0] as usize].clone();
            for pair in word.windows(2) {
                mass *= &chain.transition[pair[0] as usize][pair[1] as usize];
            }
            Ok(MeasureValue::Exact(mass))
        }
        SystemKind::Gauss => {
            if let Some(&bad) = word.iter().find(|&&s| s == 0) {
                return Err(Error::InvalidSymbol {
                    symbol: bad,
                    system: "gauss".into(),
                });
            }
            if word.is_empty() {
                return Ok(MeasureValue::Approx(1.0));
            }
            let (lo, hi) = cylinder_interval(word);
            let a = lo.to_f64().unwrap_or(f64::NAN);
            let b = hi.to_f64().unwrap_or(f64::NAN);
            Ok(MeasureValue::Approx(gauss_measure(a, b)?))
        }
    }
}

/// Gauss measure of [a, b]: (1/log 2) * integral of dx/(1+x).
pub fn gauss_measure(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    Ok((b.ln_1p() - a.ln_1p()) / LN_2)
}
