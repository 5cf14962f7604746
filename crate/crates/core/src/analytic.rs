//! Closed-form continuum propagators and the lattice-vs-continuum report.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functional::{FunctionalKind, FunctionalSpec, PhaseMode};
use crate::kernel::{transfer_matrix_row, NormalizationSpec};
use crate::lattice::LatticeSpec;

/// Imaginary-time free-particle kernel
/// `(μ/(2πħT))^{1/2} exp(-μ(x_b - x_a)²/(2ħT))`.
pub fn heat_kernel(mu: f64, hbar: f64, t: f64, x_a: f64, x_b: f64) -> f64 {
    let dx = x_b - x_a;
    (mu / (2.0 * PI * hbar * t)).sqrt() * (-mu * dx * dx / (2.0 * hbar * t)).exp()
}

/// Real-time harmonic-oscillator (Mehler) kernel; reduces to the free
/// particle at `omega = 0`. Valid for `0 < ωT < π`.
pub fn oscillator_propagator(
    mu: f64,
    omega: f64,
    hbar: f64,
    t: f64,
    x_a: f64,
    x_b: f64,
) -> Complex64 {
    if omega == 0.0 {
        let dx = x_b - x_a;
        let pref = Complex64::new(0.0, 2.0 * PI * hbar * t / mu).sqrt().inv();
        return pref * Complex64::cis(mu * dx * dx / (2.0 * hbar * t));
    }
    let s = (omega * t).sin();
    let c = (omega * t).cos();
    let pref = Complex64::new(0.0, 2.0 * PI * hbar * s / (mu * omega)).sqrt().inv();
    let phase = mu * omega * ((x_a * x_a + x_b * x_b) * c - 2.0 * x_a * x_b) / (2.0 * hbar * s);
    pref * Complex64::cis(phase)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub b_site: i64,
    pub x_b: f64,
    pub lattice: Complex64,
    pub analytic: Complex64,
    /// `|lattice - analytic| / |analytic|`.
    pub rel_error: f64,
    /// `arg(lattice / analytic)`, radians.
    pub phase_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub a_site: i64,
    pub duration: f64,
    pub rows: Vec<ComparisonRow>,
    pub max_rel_error: f64,
}

/// Compares one lattice kernel row with the continuum oracle at the requested
/// end sites.
///
/// Supported combinations, all under Feynman normalization: euclidean mode
/// with the free action (heat kernel), and oscillatory mode with the free or
/// harmonic action (Mehler kernel).
pub fn compare_analytic(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a_site: i64,
    b_sites: &[i64],
) -> Result<Comparison> {
    if norm != NormalizationSpec::Feynman {
        return Err(Error::Unsupported("analytic comparison needs feynman normalization".into()));
    }
    let t = spec.duration();
    let hbar = f.hbar();
    let x_a = spec.position(a_site);
    let oracle: Box<dyn Fn(f64) -> Complex64> = match (mode, f.kind) {
        (PhaseMode::Euclidean, FunctionalKind::FreeAction) => {
            let mu = f.mu;
            Box::new(move |x_b| Complex64::new(heat_kernel(mu, hbar, t, x_a, x_b), 0.0))
        }
        (PhaseMode::Oscillatory, FunctionalKind::FreeAction) => {
            let mu = f.mu;
            Box::new(move |x_b| oscillator_propagator(mu, 0.0, hbar, t, x_a, x_b))
        }
        (PhaseMode::Oscillatory, FunctionalKind::HarmonicAction) => {
            let wt = f.omega * t;
            if wt.is_nan() || wt >= PI {
                return Err(Error::Unsupported(format!(
                    "oscillator kernel needs omega*T < pi, got {wt}"
                )));
            }
            let (mu, omega) = (f.mu, f.omega);
            Box::new(move |x_b| oscillator_propagator(mu, omega, hbar, t, x_a, x_b))
        }
        (mode, kind) => {
            return Err(Error::Unsupported(format!(
                "no analytic oracle for {kind:?} in {mode:?} mode"
            )))
        }
    };
    if let Some(&b) = b_sites.iter().find(|&&b| !spec.contains(b)) {
        return Err(Error::EndpointOutOfBounds {
            which: "b",
            detail: format!("site {b} outside [{}, {}]", spec.site_min, spec.site_max),
        });
    }
    let row = transfer_matrix_row(spec, f, mode, norm, a_site)?;
    let rows: Vec<ComparisonRow> = b_sites
        .iter()
        .map(|&b_site| {
            let x_b = spec.position(b_site);
            let lattice = row[spec.index_of(b_site)];
            let analytic = oracle(x_b);
            ComparisonRow {
                b_site,
                x_b,
                lattice,
                analytic,
                rel_error: (lattice - analytic).norm() / analytic.norm(),
                phase_error: (lattice / analytic).arg(),
            }
        })
        .collect();
    let max_rel_error = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    Ok(Comparison { a_site, duration: t, rows, max_rel_error })
}
