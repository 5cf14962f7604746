//! The least-`m` path and how strongly the path sum concentrates around it.

use num_complex::Complex64;
use serde::Serialize;

use crate::accum::ComplexSum;
use crate::error::{Error, Result};
use crate::functional::{raw_m, FunctionalSpec, PhaseMode};
use crate::kernel::{
    transfer_matrix_kernel, transfer_matrix_row, NormalizationSpec, DEFAULT_ENUMERATION_CAP,
};
use crate::lattice::{
    check_span, enumerate_paths, path_count, validate_path, Endpoint, LatticeSpec, Path,
};

/// Global minimizer of `m` over all admissible paths `a -> b`, by dynamic
/// programming over slices.
///
/// Among minimizers the lexicographically smallest site sequence wins. The
/// returned `m_min` is the same left-to-right sum `eval_m` produces for the
/// returned path, bit for bit.
pub fn find_stationary_path(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    a: Endpoint,
    b: Endpoint,
) -> Result<(Path, f64)> {
    f.validate()?;
    if f.offset != 0.0 {
        return Err(Error::InvalidFunctional("stationary path search needs a zero offset".into()));
    }
    check_span(spec, a, b)?;
    let n = spec.num_sites();
    let slices = spec.n_slices;

    // best[k][j]: smallest prefix value reaching site j at slice k.
    let mut best = vec![vec![None::<f64>; n]; slices + 1];
    best[0][spec.index_of(a.site)] = Some(0.0);
    for k in 1..=slices {
        for j in 0..n {
            let to = spec.site_at(j);
            let mut min: Option<f64> = None;
            for (i, prev) in best[k - 1].iter().enumerate() {
                let Some(prefix) = *prev else { continue };
                let from = spec.site_at(i);
                if !spec.move_set.admits(from, to) {
                    continue;
                }
                let v = prefix + f.step(spec, from, to);
                if min.map_or(true, |m| v < m) {
                    min = Some(v);
                }
            }
            best[k][j] = min;
        }
    }
    let b_idx = spec.index_of(b.site);
    let m_min = best[slices][b_idx].ok_or(Error::NoAdmissiblePath { from: a.site, to: b.site })?;

    // Mark states lying on some prefix-optimal route to b.
    let mut good = vec![vec![false; n]; slices + 1];
    good[slices][b_idx] = true;
    for k in (0..slices).rev() {
        for i in 0..n {
            let Some(prefix) = best[k][i] else { continue };
            let from = spec.site_at(i);
            good[k][i] = (0..n).any(|j| {
                let to = spec.site_at(j);
                good[k + 1][j]
                    && spec.move_set.admits(from, to)
                    && best[k + 1][j] == Some(prefix + f.step(spec, from, to))
            });
        }
    }

    let mut sites = Vec::with_capacity(slices + 1);
    let mut cur = spec.index_of(a.site);
    sites.push(a.site);
    for k in 0..slices {
        let from = spec.site_at(cur);
        let prefix = best[k][cur].expect("on optimal route");
        cur = (0..n)
            .find(|&j| {
                let to = spec.site_at(j);
                good[k + 1][j]
                    && spec.move_set.admits(from, to)
                    && best[k + 1][j] == Some(prefix + f.step(spec, from, to))
            })
            .expect("optimal route continues");
        sites.push(spec.site_at(cur));
    }
    Ok((Path::new(sites), m_min))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeReport {
    /// Maximum per-slice site deviation from the center path.
    pub width: u64,
    pub partial_amplitude: Complex64,
    pub total_amplitude: Complex64,
    /// `|partial|² / |total|²`. NaN when the total amplitude vanishes.
    pub mass_ratio: f64,
}

/// Share of the kernel carried by paths that stay within `width` sites of
/// `center` at every slice.
pub fn tube_mass(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    center: &Path,
    width: u64,
) -> Result<TubeReport> {
    tube_mass_with_cap(spec, f, mode, norm, center, width, DEFAULT_ENUMERATION_CAP)
}

pub fn tube_mass_with_cap(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    center: &Path,
    width: u64,
    cap: u128,
) -> Result<TubeReport> {
    f.validate()?;
    validate_path(spec, center).map_err(Error::InvalidPath)?;
    let a = Endpoint::new(0, center.start());
    let b = Endpoint::new(spec.n_slices, center.end());
    let count = path_count(spec, a, b)?;
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let mut partial = ComplexSum::new();
    let mut total = ComplexSum::new();
    for path in enumerate_paths(spec, a, b)? {
        let w = mode.weight(raw_m(f, spec, &path) + f.offset);
        total.add(w);
        if path.max_deviation(center) <= width {
            partial.add(w);
        }
    }
    let factor = norm.factor(spec, f, mode);
    let partial_amplitude = partial.value() * factor;
    let total_amplitude = total.value() * factor;
    let denom = total_amplitude.norm_sqr();
    let mass_ratio = if denom > 0.0 { partial_amplitude.norm_sqr() / denom } else { f64::NAN };
    Ok(TubeReport { width, partial_amplitude, total_amplitude, mass_ratio })
}

/// Distribution over sites at the midpoint slice `N/2` for a point found at
/// `a` and later at `b`: `p(c) ∝ |K(c, a) K(b, c)|²`, normalized. Returns all
/// zeros when every term vanishes.
pub fn midpoint_distribution(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a: Endpoint,
    b: Endpoint,
) -> Result<(usize, Vec<f64>)> {
    check_span(spec, a, b)?;
    let n = spec.num_sites();
    let mid = spec.n_slices / 2;
    let first: Vec<Complex64> = if mid == 0 {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[spec.index_of(a.site)] = Complex64::new(1.0, 0.0);
        e
    } else {
        transfer_matrix_row(&spec.with_slices(mid), f, mode, norm, a.site)?
    };
    let second = transfer_matrix_kernel(&spec.with_slices(spec.n_slices - mid), f, mode, norm)?;
    let raw: Vec<f64> = spec
        .sites()
        .zip(&first)
        .map(|(c, k1)| (k1 * second.amplitude(c, b.site)).norm_sqr())
        .collect();
    let total: f64 = raw.iter().copied().collect::<crate::accum::NeumaierSum>().value();
    let pdf = if total > 0.0 { raw.iter().map(|p| p / total).collect() } else { raw };
    Ok((mid, pdf))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HScanRow {
    pub h: f64,
    pub m_min: f64,
    pub mass_ratio_w1: f64,
    /// Site of the largest midpoint probability (smallest site on ties).
    pub argmax_site: i64,
    /// Variance of the midpoint distribution, in squared length units.
    pub midpoint_variance: f64,
    pub stationary: Path,
}

/// Repeats the stationary-path and tube analysis for each `h` in a strictly
/// descending list. `family.h` is ignored.
pub fn h_scan(
    spec: &LatticeSpec,
    family: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a: Endpoint,
    b: Endpoint,
    h_values: &[f64],
) -> Result<Vec<HScanRow>> {
    if h_values.len() < 2 {
        return Err(Error::InvalidScan(format!(
            "need at least 2 values of h, got {}",
            h_values.len()
        )));
    }
    if let Some(h) = h_values.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidScan(format!("h must be positive, got {h}")));
    }
    if h_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidScan("h values must be strictly descending".into()));
    }
    h_values
        .iter()
        .map(|&h| {
            let f = family.with_h(h);
            let (stationary, m_min) = find_stationary_path(spec, &f, a, b)?;
            let tube = tube_mass(spec, &f, mode, norm, &stationary, 1)?;
            let (_, pdf) = midpoint_distribution(spec, &f, mode, norm, a, b)?;
            let mut arg = 0;
            for (i, &p) in pdf.iter().enumerate() {
                if p > pdf[arg] {
                    arg = i;
                }
            }
            let mean: f64 = spec.sites().zip(&pdf).map(|(s, p)| spec.position(s) * p).sum();
            let variance: f64 =
                spec.sites().zip(&pdf).map(|(s, p)| (spec.position(s) - mean).powi(2) * p).sum();
            Ok(HScanRow {
                h,
                m_min,
                mass_ratio_w1: tube.mass_ratio,
                argmax_site: spec.site_at(arg),
                midpoint_variance: variance,
                stationary,
            })
        })
        .collect()
}
