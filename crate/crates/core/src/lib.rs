//! Lattice path sums with phase weights `e^{2πim}`.
//!
//! A point moves on a bounded grid of integer sites over discrete time
//! slices. Each admissible path gets an additive value `m` and the weight
//! `e^{2πim}`; the kernel `K(b, a)` is the coherent sum of those weights and
//! `|K|²` is the transition probability. This crate computes kernels both by
//! enumerating paths and by transfer-matrix contraction, locates the
//! least-`m` path, measures how the sum concentrates around it as `h`
//! shrinks, and draws reproducible position samples from `|K|²`.

pub mod accum;
pub mod analytic;
pub mod classical;
pub mod error;
pub mod functional;
pub mod kernel;
pub mod lattice;
pub mod measurement;

pub use num_complex::Complex64;

pub use analytic::{
    compare_analytic, heat_kernel, oscillator_propagator, Comparison, ComparisonRow,
};
pub use classical::{
    find_stationary_path, h_scan, midpoint_distribution, tube_mass, tube_mass_with_cap, HScanRow,
    TubeReport,
};
pub use error::{Error, Result};
pub use functional::{
    eval_m, eval_phase, m_rate, shift_functional, FunctionalKind, FunctionalSpec, PhaseMode,
};
pub use kernel::{
    brute_force_kernel, brute_force_kernel_with_cap, compose_kernels, normalized_probabilities,
    row_path_count, transfer_matrix_kernel, transfer_matrix_kernel_with_budget,
    transfer_matrix_row, transition_probability, Kernel, NormalizationSpec,
    DEFAULT_ENUMERATION_CAP, DEFAULT_TRANSFER_BUDGET,
};
pub use lattice::{
    enumerate_paths, path_count, validate_path, Boundary, Endpoint, LatticeSpec, MoveSet, Path,
    Paths, Violation, ViolationKind,
};
pub use measurement::{
    position_pdf, sample_position, simulate_two_point, uniform, MeasurementRecord, Pdf, TwoPoint,
};
