//! Independent reference implementations for tests: exhaustive enumeration
//! over the full site product and direct evaluation of the functionals from
//! their formulas. Nothing here calls into the library's path or kernel code.

#![allow(dead_code)]

use std::f64::consts::PI;

use itertools::Itertools;
use num_complex::Complex64;
use pathsum_core::{
    FunctionalKind, FunctionalSpec, LatticeSpec, MoveSet, NormalizationSpec, PhaseMode,
};

/// Every site sequence from `a` to `b` over the lattice, in lexicographic
/// order, found by filtering the full Cartesian product.
pub fn all_paths(spec: &LatticeSpec, a: i64, b: i64) -> Vec<Vec<i64>> {
    let n = spec.n_slices;
    let interior: Vec<Vec<i64>> = if n == 1 {
        vec![vec![]]
    } else {
        (0..n - 1)
            .map(|_| (spec.site_min..=spec.site_max).collect::<Vec<_>>())
            .multi_cartesian_product()
            .collect()
    };
    interior
        .into_iter()
        .map(|mid| {
            let mut p = vec![a];
            p.extend(mid);
            p.push(b);
            p
        })
        .filter(|p| match spec.move_set {
            MoveSet::Local => p.windows(2).all(|w| (w[1] - w[0]).abs() <= 1),
            MoveSet::AllToAll => true,
        })
        .collect()
}

pub fn m_of(f: &FunctionalSpec, spec: &LatticeSpec, p: &[i64]) -> f64 {
    let (eps, delta) = (spec.eps, spec.delta);
    let mut total = 0.0;
    for w in p.windows(2) {
        let dn = (w[1] - w[0]) as f64;
        let v = dn * delta / eps;
        let x = w[0] as f64 * delta;
        total += match f.kind {
            FunctionalKind::TotalVariation => dn.abs(),
            FunctionalKind::FreeAction => eps * f.mu / 2.0 * v * v / f.h,
            FunctionalKind::HarmonicAction => {
                eps * (f.mu / 2.0 * v * v - f.mu * f.omega * f.omega / 2.0 * x * x) / f.h
            }
        };
    }
    total + f.offset
}

pub fn weight(mode: PhaseMode, m: f64) -> Complex64 {
    match mode {
        PhaseMode::Oscillatory => Complex64::from_polar(1.0, 2.0 * PI * m),
        PhaseMode::Euclidean => Complex64::new((-2.0 * PI * m).exp(), 0.0),
    }
}

pub fn norm_factor(
    norm: NormalizationSpec,
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
) -> Complex64 {
    match norm {
        NormalizationSpec::Unit => Complex64::new(1.0, 0.0),
        NormalizationSpec::Feynman => {
            let hbar = f.h / (2.0 * PI);
            let a2 = 2.0 * PI * hbar * spec.eps / f.mu;
            let a = match mode {
                PhaseMode::Oscillatory => Complex64::from_polar(a2.sqrt(), PI / 4.0),
                PhaseMode::Euclidean => Complex64::new(a2.sqrt(), 0.0),
            };
            let n = spec.n_slices as i32;
            Complex64::new(1.0, 0.0) / a.powi(n) * spec.delta.powi(n - 1)
        }
    }
}

pub fn kernel(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a: i64,
    b: i64,
) -> Complex64 {
    let sum: Complex64 = all_paths(spec, a, b).iter().map(|p| weight(mode, m_of(f, spec, p))).sum();
    sum * norm_factor(norm, spec, f, mode)
}

/// `|x - y| <= tol * max(|x|, |y|)`, with `scale` as a floor on the
/// denominator for sums that cancel to nearly zero.
pub fn rel_close(x: Complex64, y: Complex64, tol: f64, scale: f64) -> bool {
    (x - y).norm() <= tol * x.norm().max(y.norm()).max(scale)
}
