//! Transition kernels `K(b, a)`: coherent sums of path weights, computed by
//! brute-force enumeration or by slice-by-slice transfer-matrix contraction.
//!
//! Both routes add exactly the same finite set of terms; they differ only in
//! grouping. All reductions run in ascending site order through compensated
//! accumulators, so results do not depend on thread count.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accum::ComplexSum;
use crate::error::{Error, Result};
use crate::functional::{raw_m, FunctionalSpec, PhaseMode};
use crate::lattice::{check_span, count_row, enumerate_paths, path_count, Endpoint, LatticeSpec};

/// Default limit on the number of paths a brute-force sum may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Default limit on the number of kernel matrix entries.
pub const DEFAULT_TRANSFER_BUDGET: u128 = 1 << 22;

/// The per-path constant in front of `e^{2πim}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationSpec {
    /// Constant 1, no measure. Amplitudes are dimensionless.
    #[default]
    Unit,
    /// `A^{-1}` per slice with `A = (2πiħε/μ)^{1/2}` (oscillatory) or
    /// `(2πħε/μ)^{1/2}` (euclidean), plus `δ` per intermediate slice.
    /// Amplitudes carry units of 1/length.
    Feynman,
}

impl NormalizationSpec {
    /// `A^{-1}`, the per-slice factor. 1 under `Unit`.
    pub fn slice_factor(
        self,
        spec: &LatticeSpec,
        f: &FunctionalSpec,
        mode: PhaseMode,
    ) -> Complex64 {
        match self {
            NormalizationSpec::Unit => Complex64::new(1.0, 0.0),
            NormalizationSpec::Feynman => {
                let scale = TAU * f.hbar() * spec.eps / f.mu;
                let a = match mode {
                    PhaseMode::Oscillatory => Complex64::new(0.0, scale).sqrt(),
                    PhaseMode::Euclidean => Complex64::new(scale.sqrt(), 0.0),
                };
                a.inv()
            }
        }
    }

    /// Weight given to each intermediate slice when summing over its sites.
    pub fn measure(self, spec: &LatticeSpec) -> f64 {
        match self {
            NormalizationSpec::Unit => 1.0,
            NormalizationSpec::Feynman => spec.delta,
        }
    }

    /// Overall factor for a span of `spec.n_slices` slices:
    /// `A^{-N} δ^{N-1}`.
    pub fn factor(self, spec: &LatticeSpec, f: &FunctionalSpec, mode: PhaseMode) -> Complex64 {
        let n = spec.n_slices as i32;
        self.slice_factor(spec, f, mode).powi(n) * self.measure(spec).powi(n - 1)
    }
}

/// Complex amplitudes over (start site, end site), with the full provenance of
/// how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    spec: LatticeSpec,
    start_slice: usize,
    functional: FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    /// Row-major by start site.
    amplitudes: Vec<Complex64>,
}

impl Kernel {
    /// Builds a kernel from raw amplitudes. `spec.n_slices` is the span
    /// length; the kernel covers slices `[start_slice, start_slice + n_slices]`.
    pub fn from_parts(
        spec: LatticeSpec,
        start_slice: usize,
        functional: FunctionalSpec,
        mode: PhaseMode,
        norm: NormalizationSpec,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        spec.validate()?;
        functional.validate()?;
        let n = spec.num_sites();
        if amplitudes.len() != n * n {
            return Err(Error::Malformed(format!(
                "expected {} amplitudes for {n} sites, got {}",
                n * n,
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("kernel amplitude overflowed".into()));
        }
        Ok(Self { spec, start_slice, functional, mode, norm, amplitudes })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn functional(&self) -> &FunctionalSpec {
        &self.functional
    }

    pub fn mode(&self) -> PhaseMode {
        self.mode
    }

    pub fn norm(&self) -> NormalizationSpec {
        self.norm
    }

    pub fn start_slice(&self) -> usize {
        self.start_slice
    }

    pub fn end_slice(&self) -> usize {
        self.start_slice + self.spec.n_slices
    }

    pub fn dim(&self) -> usize {
        self.spec.num_sites()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude from `a_site` (start slice) to `b_site` (end slice).
    pub fn amplitude(&self, a_site: i64, b_site: i64) -> Complex64 {
        let n = self.dim();
        self.amplitudes[self.spec.index_of(a_site) * n + self.spec.index_of(b_site)]
    }

    /// All amplitudes leaving `a_site`, indexed by end site.
    pub fn row(&self, a_site: i64) -> &[Complex64] {
        let n = self.dim();
        let i = self.spec.index_of(a_site);
        &self.amplitudes[i * n..(i + 1) * n]
    }

    pub fn transition_probability(&self, a_site: i64, b_site: i64) -> f64 {
        transition_probability(self.amplitude(a_site, b_site))
    }

    /// `p̂(b) = |K(b,a)|² / Σ_b' |K(b',a)|²` over end sites; `None` when the
    /// row vanishes.
    pub fn normalized_probabilities(&self, a_site: i64) -> Option<Vec<f64>> {
        normalized_probabilities(self.row(a_site))
    }

    fn same_provenance(&self, other: &Kernel) -> Result<()> {
        let a = &self.spec;
        let b = &other.spec;
        if a.with_slices(1) != b.with_slices(1) {
            return Err(Error::ProvenanceMismatch("lattices differ".into()));
        }
        if self.functional != other.functional {
            return Err(Error::ProvenanceMismatch("functionals differ".into()));
        }
        if self.mode != other.mode {
            return Err(Error::ProvenanceMismatch("phase modes differ".into()));
        }
        if self.norm != other.norm {
            return Err(Error::ProvenanceMismatch("normalizations differ".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&KernelFile::from(self)).expect("kernel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: KernelFile =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        Kernel::from_parts(
            file.spec,
            file.start_slice,
            file.functional,
            file.mode,
            file.norm,
            file.matrix.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        )
    }
}

/// On-disk layout of a kernel.
#[derive(Debug, Serialize, Deserialize)]
struct KernelFile {
    spec: LatticeSpec,
    functional: FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    #[serde(default)]
    start_slice: usize,
    /// `[re, im]` pairs, row-major by start site.
    matrix: Vec<[f64; 2]>,
}

impl From<&Kernel> for KernelFile {
    fn from(k: &Kernel) -> Self {
        Self {
            spec: k.spec.clone(),
            functional: k.functional,
            mode: k.mode,
            norm: k.norm,
            start_slice: k.start_slice,
            matrix: k.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// `|K|²`.
#[inline]
pub fn transition_probability(amplitude: Complex64) -> f64 {
    amplitude.norm_sqr()
}

/// Slice-normalized squared moduli of a kernel row; `None` if the row is zero.
pub fn normalized_probabilities(row: &[Complex64]) -> Option<Vec<f64>> {
    let raw: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
    let total = raw.iter().copied().collect::<crate::accum::NeumaierSum>().value();
    if total > 0.0 && total.is_finite() {
        Some(raw.into_iter().map(|p| p / total).collect())
    } else {
        None
    }
}

/// `Σ_paths weight(m)` from `a` to `b`, summed in enumeration order, times
/// the normalization factor. Refuses when more than `cap` paths exist.
pub fn brute_force_kernel_with_cap(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a: Endpoint,
    b: Endpoint,
    cap: u128,
) -> Result<Complex64> {
    f.validate()?;
    let count = path_count(spec, a, b)?;
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let mut acc = ComplexSum::new();
    for path in enumerate_paths(spec, a, b)? {
        acc.add(mode.weight(raw_m(f, spec, &path) + f.offset));
    }
    let k = acc.value() * norm.factor(spec, f, mode);
    if !(k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::NonFinite(format!("path sum from {} to {}", a.site, b.site)));
    }
    Ok(k)
}

/// [`brute_force_kernel_with_cap`] with [`DEFAULT_ENUMERATION_CAP`].
pub fn brute_force_kernel(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a: Endpoint,
    b: Endpoint,
) -> Result<Complex64> {
    brute_force_kernel_with_cap(spec, f, mode, norm, a, b, DEFAULT_ENUMERATION_CAP)
}

/// Total number of paths leaving `a_site` over the whole span; the work a
/// brute-force row would do.
pub fn row_path_count(spec: &LatticeSpec, a_site: i64) -> Result<u128> {
    check_span(spec, Endpoint::new(0, a_site), Endpoint::new(spec.n_slices, a_site))?;
    Ok(count_row(spec, a_site))
}

/// Single-move weights with normalization folded in: entry `(i, j)` is
/// `weight(step(i -> j)) · A^{-1} · measure`, zero for inadmissible moves.
struct StepMatrix {
    n: usize,
    weights: Vec<Complex64>,
    /// Admissible predecessor index range per target column.
    columns: Vec<(usize, usize)>,
}

impl StepMatrix {
    fn new(
        spec: &LatticeSpec,
        f: &FunctionalSpec,
        mode: PhaseMode,
        norm: NormalizationSpec,
    ) -> Self {
        let n = spec.num_sites();
        let scale = norm.slice_factor(spec, f, mode) * norm.measure(spec);
        let mut weights = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let from = spec.site_at(i);
            for j in 0..n {
                let to = spec.site_at(j);
                if spec.move_set.admits(from, to) {
                    weights[i * n + j] = mode.weight(f.step(spec, from, to)) * scale;
                }
            }
        }
        let columns = (0..n)
            .map(|j| match spec.move_set {
                crate::lattice::MoveSet::Local => (j.saturating_sub(1), (j + 1).min(n - 1)),
                crate::lattice::MoveSet::AllToAll => (0, n - 1),
            })
            .collect();
        Self { n, weights, columns }
    }

    /// `out[j] = Σ_i v[i] W[i][j]`, ascending `i`, compensated.
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (j, o) in out.iter_mut().enumerate() {
            let (lo, hi) = self.columns[j];
            let mut acc = ComplexSum::new();
            for (i, &vi) in v.iter().enumerate().take(hi + 1).skip(lo) {
                if vi != Complex64::new(0.0, 0.0) {
                    acc.add(vi * self.weights[i * self.n + j]);
                }
            }
            *o = acc.value();
        }
    }
}

fn check_budget(spec: &LatticeSpec, budget: u128) -> Result<()> {
    let n = spec.num_sites() as u128;
    let needed = n.saturating_mul(n);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

fn propagate_row(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    steps: &StepMatrix,
    start_index: usize,
) -> Vec<Complex64> {
    let n = steps.n;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[start_index] = Complex64::new(1.0, 0.0);
    let mut next = v.clone();
    for _ in 0..spec.n_slices {
        steps.apply(&v, &mut next);
        std::mem::swap(&mut v, &mut next);
    }
    // Each slice carried one measure factor; the final slice has none.
    let tail = mode.weight(f.offset) / norm.measure(spec);
    v.iter_mut().for_each(|z| *z *= tail);
    v
}

/// One row `K(·, a_site)` of the transfer-matrix kernel.
pub fn transfer_matrix_row(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a_site: i64,
) -> Result<Vec<Complex64>> {
    check_span(spec, Endpoint::new(0, a_site), Endpoint::new(spec.n_slices, a_site))?;
    f.validate()?;
    check_budget(spec, DEFAULT_TRANSFER_BUDGET)?;
    let steps = StepMatrix::new(spec, f, mode, norm);
    Ok(propagate_row(spec, f, mode, norm, &steps, spec.index_of(a_site)))
}

/// Full endpoint matrix by slice-by-slice contraction, refusing when the
/// matrix would exceed `budget` entries. Rows are computed in parallel.
pub fn transfer_matrix_kernel_with_budget(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    budget: u128,
) -> Result<Kernel> {
    spec.validate()?;
    f.validate()?;
    check_budget(spec, budget)?;
    let steps = StepMatrix::new(spec, f, mode, norm);
    let n = spec.num_sites();
    let rows: Vec<Vec<Complex64>> =
        (0..n).into_par_iter().map(|i| propagate_row(spec, f, mode, norm, &steps, i)).collect();
    Kernel::from_parts(spec.clone(), 0, *f, mode, norm, rows.concat())
}

/// [`transfer_matrix_kernel_with_budget`] with [`DEFAULT_TRANSFER_BUDGET`].
pub fn transfer_matrix_kernel(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
) -> Result<Kernel> {
    transfer_matrix_kernel_with_budget(spec, f, mode, norm, DEFAULT_TRANSFER_BUDGET)
}

/// Joins a kernel over `[s, k]` with one over `[k, e]`:
/// `K(a, b) = Σ_c K1(a, c) K2(c, b) w`, with `w` the intermediate measure.
///
/// Each input already carries the functional's offset once; the product
/// carries it twice, so one copy is divided back out.
pub fn compose_kernels(first: &Kernel, second: &Kernel) -> Result<Kernel> {
    first.same_provenance(second)?;
    if first.end_slice() != second.start_slice {
        return Err(Error::ProvenanceMismatch(format!(
            "first kernel ends at slice {}, second starts at {}",
            first.end_slice(),
            second.start_slice
        )));
    }
    let spec = first.spec.with_slices(first.spec.n_slices + second.spec.n_slices);
    let n = first.dim();
    let w = first.norm.measure(&spec);
    let fix = first.mode.weight(first.functional.offset).inv() * w;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let row = &first.amplitudes[i * n..(i + 1) * n];
        for j in 0..n {
            let mut acc = ComplexSum::new();
            for (c, &x) in row.iter().enumerate() {
                acc.add(x * second.amplitudes[c * n + j]);
            }
            out.push(acc.value() * fix);
        }
    }
    Kernel::from_parts(spec, first.start_slice, first.functional, first.mode, first.norm, out)
}
