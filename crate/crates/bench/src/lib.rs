//! Workloads shared by the benchmarks.

use std::f64::consts::TAU;

use pathsum_core::{FunctionalSpec, LatticeSpec, MoveSet};

/// Any-to-any lattice with `sites` sites centred on 0 and `n_slices` slices.
pub fn all_to_all(n_slices: usize, sites: i64) -> LatticeSpec {
    let lo = -(sites / 2);
    LatticeSpec::new(n_slices, 1.0 / n_slices as f64, 0.25, lo, lo + sites - 1, MoveSet::AllToAll)
        .expect("valid lattice")
}

/// Local-move lattice with `sites` sites centred on 0.
pub fn local(n_slices: usize, sites: i64) -> LatticeSpec {
    let lo = -(sites / 2);
    LatticeSpec::new(n_slices, 1.0, 1.0, lo, lo + sites - 1, MoveSet::Local).expect("valid lattice")
}

pub fn harmonic() -> FunctionalSpec {
    FunctionalSpec::harmonic_action(1.0, 0.8, TAU)
}
