//! Trimmed Birkhoff sums over symbolic dynamical systems.
//!
//! The crate generates exact symbolic orbits for the Gauss map, the doubling
//! map, and finite-state Markov shifts, evaluates the truncated-moment and
//! error-term bookkeeping behind trimmed ergodic averages, estimates
//! correlation-sum mixing bounds, and drives seeded Monte Carlo experiments
//! over all of it. Orbit symbols are certified by exact integer comparisons;
//! floating point only enters in the statistics layer.

mod bignat;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod mainterm;
pub mod mixing;
pub mod stats;
pub mod trimming;

pub use dynamics::{LazyUniformReal, OrbitDigits, RealInput, SystemKind, SystemModel};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, SampleRecord};
pub use mainterm::{MainTermTable, TailProfile};
pub use mixing::MixingProfile;
pub use trimming::TrimmedSum;
