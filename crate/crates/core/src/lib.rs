//! k-nearest-neighbor regression with finite-sample uniform error bounds,
//! level-set and maximum estimators built on it, synthetic ground truth, and
//! a Monte Carlo harness that measures empirical convergence rates.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod harness;
pub mod index;
pub mod regression;
pub mod structures;
pub mod synth;

pub use error::{Error, Result};
pub use index::{
    brute_force_knn, brute_force_range, build_index, KdTree, NeighborSet, PointSet, SortedLine,
};
pub use regression::{Dataset, Regressor, ScalarField};
