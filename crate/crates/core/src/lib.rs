//! Sequential nonparametric density estimation and online prediction for
//! stationary ergodic streams over finite, countable, continuous or mixed
//! supports.
//!
//! The estimator quantizes each observation at every level of a refining
//! partition family, codes the resulting cell sequences with a universal
//! sequential coder per level, spreads each level's cell probabilities over
//! the cells in proportion to a reference measure, and mixes the levels with
//! fixed positive weights.

pub mod coder;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod mixture;
pub mod numeric;
pub mod partition;
pub mod reference;
pub mod sources;

pub use coder::{kt_conditional, LevelCoder};
pub use error::{Error, Result};
pub use mixture::{default_weights, MixtureEstimator, WeightVector};
pub use partition::{Cell, PartitionFamily, Support};
pub use reference::{BoundedFunction, ReferenceMeasure};
