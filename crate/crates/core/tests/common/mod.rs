#![allow(dead_code)]

use darkcav_core::linalg::{CMatrix, C64};
use darkcav_core::SystemParams;
use proptest::prelude::*;

pub fn complex_matrix(m: usize, n: usize, scale: f64) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), m * n)
        .prop_map(move |v| CMatrix::from_iterator(m, n, v.into_iter().map(|(re, im)| C64::new(re, im) * scale)))
}

pub fn complex_vec(len: usize, scale: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), len)
        .prop_map(move |v| v.into_iter().map(|(re, im)| C64::new(re, im) * scale).collect())
}

/// Random system with 1 ≤ M ≤ 3, M ≤ N ≤ `max_atoms`, complex G and drives.
pub fn random_system(max_atoms: usize) -> impl Strategy<Value = SystemParams> {
    (1usize..=3)
        .prop_flat_map(move |m| (Just(m), m.max(2)..=max_atoms.max(m)))
        .prop_flat_map(|(m, n)| (complex_matrix(m, n, 1.0), complex_vec(m, 0.1)))
        .prop_map(|(g, eta)| SystemParams::new(g, eta).unwrap())
}

/// Real coupling and real drives.
pub fn real_system(max_atoms: usize) -> impl Strategy<Value = SystemParams> {
    (1usize..=2)
        .prop_flat_map(move |m| (Just(m), m.max(2)..=max_atoms.max(m)))
        .prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(-1.0..1.0f64, m * n).prop_map(move |v| {
                    CMatrix::from_iterator(m, n, v.into_iter().map(|x| C64::new(x, 0.0)))
                }),
                prop::collection::vec(-0.1..0.1f64, m),
            )
        })
        .prop_map(|(g, eta)| SystemParams::new(g, eta.into_iter().map(|x| C64::new(x, 0.0)).collect()).unwrap())
}
