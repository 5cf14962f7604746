//! Position distributions from kernels, seeded draws from them, and the
//! two-point transition probability.
//!
//! Draws come from a counter-based generator: ChaCha20 keyed by the seed,
//! with the draw index selecting the stream. A record depends only on
//! `(pdf, seed, draw_index)`, never on how many draws came before it.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::accum::{ComplexSum, NeumaierSum};
use crate::error::{Error, Result};
use crate::functional::{raw_m, FunctionalSpec, PhaseMode};
use crate::kernel::{
    normalized_probabilities, transfer_matrix_row, Kernel, NormalizationSpec,
    DEFAULT_ENUMERATION_CAP,
};
use crate::lattice::{enumerate_paths, path_count, Endpoint, LatticeSpec};

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Pdf {
    slice: usize,
    site_min: i64,
    delta: f64,
    weights: Vec<f64>,
    normalized: bool,
}

impl Pdf {
    /// Unnormalized weights over consecutive sites starting at `site_min`.
    pub fn new(slice: usize, site_min: i64, delta: f64, weights: Vec<f64>) -> Self {
        Self { slice, site_min, delta, weights, normalized: false }
    }

    pub fn slice(&self) -> usize {
        self.slice
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.weights.len()).map(|i| self.site_min + i as i64)
    }

    pub fn weight(&self, site: i64) -> f64 {
        let i = site - self.site_min;
        if i < 0 {
            return 0.0;
        }
        self.weights.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Rescales to unit total. Fails if the weights are negative, non-finite,
    /// or sum to zero.
    pub fn normalize(mut self) -> Result<Self> {
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::UnnormalizedPdf);
        }
        let total = self.weights.iter().copied().collect::<NeumaierSum>().value();
        if total == 0.0 || !total.is_finite() {
            return Err(Error::UnnormalizedPdf);
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        let check = self.weights.iter().copied().collect::<NeumaierSum>().value();
        self.normalized = (check - 1.0).abs() <= NORMALIZATION_TOL;
        if !self.normalized {
            return Err(Error::UnnormalizedPdf);
        }
        Ok(self)
    }
}

/// Density of finding the point at each site of `slice`, given it was found
/// at `a`: `|K(b, a)|²` normalized over `b`.
pub fn position_pdf(kernel: &Kernel, a: Endpoint, slice: usize) -> Result<Pdf> {
    if a.slice != kernel.start_slice() || slice != kernel.end_slice() {
        return Err(Error::ProvenanceMismatch(format!(
            "kernel spans slices [{}, {}], asked for [{}, {}]",
            kernel.start_slice(),
            kernel.end_slice(),
            a.slice,
            slice
        )));
    }
    let spec = kernel.spec();
    if !spec.contains(a.site) {
        return Err(Error::EndpointOutOfBounds {
            which: "a",
            detail: format!("site {} outside [{}, {}]", a.site, spec.site_min, spec.site_max),
        });
    }
    let weights = normalized_probabilities(kernel.row(a.site)).ok_or(Error::ZeroColumn(a.site))?;
    Pdf::new(slice, spec.site_min, spec.delta, weights).normalize()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub slice: usize,
    pub site: i64,
    /// `site * delta`.
    pub r: f64,
    pub seed: u64,
    pub draw_index: u64,
}

/// Uniform variate in `[0, 1)` for key `(seed, draw_index)`.
pub fn uniform(seed: u64, draw_index: u64) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw from `pdf`.
pub fn sample_position(pdf: &Pdf, seed: u64, draw_index: u64) -> Result<MeasurementRecord> {
    if !pdf.normalized {
        return Err(Error::UnnormalizedPdf);
    }
    let u = uniform(seed, draw_index);
    let mut cdf = 0.0;
    let mut chosen = None;
    let mut last_positive = 0;
    for (i, &w) in pdf.weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        cdf += w;
        if w > 0.0 && u < cdf {
            chosen = Some(i);
            break;
        }
    }
    // Rounding can leave the final cdf a hair below 1.
    let i = chosen.unwrap_or(last_positive);
    let site = pdf.site_min + i as i64;
    Ok(MeasurementRecord { slice: pdf.slice, site, r: site as f64 * pdf.delta, seed, draw_index })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPoint {
    pub amplitude: Complex64,
    /// `P(b, a) = |K(b, a)|²`.
    pub probability: f64,
    /// `p̂(b)`: `P(b, a)` over the sum of `P(b', a)` across end sites.
    pub normalized: f64,
    /// `Σ_paths |φ|²`, the value an additive rule would give.
    pub naive_sum: f64,
}

/// Probability of finding the point at `b` after it was found at `a`,
/// alongside the additive sum it differs from.
pub fn simulate_two_point(
    spec: &LatticeSpec,
    f: &FunctionalSpec,
    mode: PhaseMode,
    norm: NormalizationSpec,
    a: Endpoint,
    b: Endpoint,
) -> Result<TwoPoint> {
    f.validate()?;
    let count = path_count(spec, a, b)?;
    if count > DEFAULT_ENUMERATION_CAP {
        return Err(Error::CapExceeded { count, cap: DEFAULT_ENUMERATION_CAP });
    }
    let mut coherent = ComplexSum::new();
    let mut naive = NeumaierSum::new();
    for path in enumerate_paths(spec, a, b)? {
        let w = mode.weight(raw_m(f, spec, &path) + f.offset);
        coherent.add(w);
        naive.add(w.norm_sqr());
    }
    let factor = norm.factor(spec, f, mode);
    let amplitude = coherent.value() * factor;
    let row = transfer_matrix_row(spec, f, mode, norm, a.site)?;
    let normalized =
        normalized_probabilities(&row).map(|p| p[spec.index_of(b.site)]).unwrap_or(0.0);
    Ok(TwoPoint {
        amplitude,
        probability: amplitude.norm_sqr(),
        normalized,
        naive_sum: naive.value() * factor.norm_sqr(),
    })
}
