//! Weak convergence of finite measures, vector-valued integration into
//! Banach and paranormed targets, and a bounded-Lipschitz oracle.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carrier;
pub mod cli;
pub mod convergence;
pub mod error;
pub mod function;
pub mod integral;
pub mod measure;
pub mod selftest;
pub mod simplex;
pub mod suite;
pub mod target;

pub use carrier::{CompactSpace, MeasurableSet, Partition, Point};
pub use error::{Error, Result};
pub use function::{Metadata, ScalarFn, VectorFunction};
pub use measure::{bl_distance, FiniteMeasure, MeasureFamily};
pub use target::{SchauderBase, TargetSpace, Vector};

/// 0-based indices of the last quarter of a prefix of length `len`:
/// 1-based `n` from `⌈3·len/4⌉` to `len`.
pub(crate) fn last_quarter(len: usize) -> std::ops::Range<usize> {
    let start = (3 * len).div_ceil(4).saturating_sub(1);
    start.min(len)..len
}
