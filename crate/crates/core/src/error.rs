use std::path::PathBuf;

/// Errors surfaced by orbit generation, table construction, and experiment runs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("refinement budget exceeded: {used} bits consumed (budget {budget}) at orbit step {step}")]
    RefinementBudgetExceeded { used: u64, budget: u64, step: usize },

    #[error("orbit digit at step {step} does not fit in 64 bits")]
    DigitOverflow { step: usize },

    #[error("rational orbit hit an exact zero at step {step}; the observable is undefined there")]
    RationalOrbitHitZero { step: usize },

    #[error("invalid rational '{input}': {reason}")]
    InvalidRational { input: String, reason: String },

    #[error("invalid quadratic irrational ({p} + {r}*sqrt({d}))/{q}: {reason}")]
    InvalidQuadratic {
        p: i64,
        r: i64,
        d: i64,
        q: i64,
        reason: String,
    },

    #[error("invalid interval [{a}, {b}]: expected 0 <= a <= b <= 1")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid symbol {symbol} for {system} cells")]
    InvalidSymbol { symbol: u64, system: String },

    #[error("invalid cell index {cell} for {system}")]
    InvalidCell { cell: usize, system: String },

    #[error("invalid transition matrix: {0}")]
    InvalidMarkov(String),

    #[error("invalid tail profile: {0}")]
    InvalidProfile(String),

    #[error("bisection for phi^-1({target}) did not converge within {iterations} iterations")]
    Nonconvergence { target: f64, iterations: usize },

    #[error("negative value {value} at index {index}; observables must be non-negative")]
    NegativeValue { value: f64, index: usize },

    #[error("truncation tail {tail} exceeds 1e-6 of moment {moment} at threshold {threshold}")]
    TruncationTail {
        tail: f64,
        moment: f64,
        threshold: f64,
    },

    #[error("main-term table degenerate: F3 is locally constant at N={n}")]
    FlatMainTerm { n: usize },

    #[error("grid must be strictly increasing with minimum {min}; got {got:?}")]
    InvalidGrid { min: usize, got: Vec<usize> },

    #[error("exponent fit needs at least {required} pairs with positive magnitudes, got {got}")]
    DegenerateFit { required: usize, got: usize },

    #[error("empirical correlation needs an orbit of at least {required} symbols, got {got}")]
    InsufficientOrbit { required: usize, got: usize },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
