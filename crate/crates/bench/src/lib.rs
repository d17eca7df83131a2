//! Benchmark fixtures.

use std::collections::BTreeSet;

use monomial_lab_core::{enumerate_jmn, MultiIndex, DEFAULT_CAP};

pub use monomial_lab_core::index::powers;

pub fn full_set(m: usize, n: usize) -> BTreeSet<MultiIndex> {
    enumerate_jmn(m, n, DEFAULT_CAP).unwrap().collect()
}
