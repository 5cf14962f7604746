//! The additive path functional `m` and the phase weight built from it.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{validate_path, LatticeSpec, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    /// `Σ |Δsite|`: the length of the countable path. Integer-valued.
    TotalVariation,
    /// Discretized free-particle action divided by `h`.
    FreeAction,
    /// Discretized harmonic-oscillator action (`L = T - V`) divided by `h`.
    HarmonicAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    /// Mass parameter.
    pub mu: f64,
    /// Angular frequency; only read by `HarmonicAction`.
    pub omega: f64,
    /// Units parameter relating `m` to the action: `h m = S`.
    pub h: f64,
    /// Constant added once per path.
    #[serde(default)]
    pub offset: f64,
}

impl FunctionalSpec {
    pub fn total_variation() -> Self {
        Self { kind: FunctionalKind::TotalVariation, mu: 1.0, omega: 0.0, h: TAU, offset: 0.0 }
    }

    pub fn free_action(mu: f64, h: f64) -> Self {
        Self { kind: FunctionalKind::FreeAction, mu, omega: 0.0, h, offset: 0.0 }
    }

    pub fn harmonic_action(mu: f64, omega: f64, h: f64) -> Self {
        Self { kind: FunctionalKind::HarmonicAction, mu, omega, h, offset: 0.0 }
    }

    pub fn with_h(self, h: f64) -> Self {
        Self { h, ..self }
    }

    /// `h / 2π`.
    pub fn hbar(&self) -> f64 {
        self.h / TAU
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidFunctional(format!("h must be positive, got {}", self.h)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidFunctional(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidFunctional(format!(
                "omega must be nonnegative, got {}",
                self.omega
            )));
        }
        if !self.offset.is_finite() {
            return Err(Error::InvalidFunctional("offset must be finite".into()));
        }
        Ok(())
    }

    /// Contribution of the single move `from -> to`. Excludes the offset.
    ///
    /// Velocity is the forward difference; the potential is sampled at the
    /// left site.
    #[inline]
    pub fn step(&self, spec: &LatticeSpec, from: i64, to: i64) -> f64 {
        match self.kind {
            FunctionalKind::TotalVariation => (to - from).abs() as f64,
            FunctionalKind::FreeAction => {
                let v = (to - from) as f64 * spec.delta / spec.eps;
                spec.eps * (0.5 * self.mu * v * v) / self.h
            }
            FunctionalKind::HarmonicAction => {
                let v = (to - from) as f64 * spec.delta / spec.eps;
                let x = from as f64 * spec.delta;
                let kinetic = 0.5 * self.mu * v * v;
                let potential = 0.5 * self.mu * self.omega * self.omega * x * x;
                spec.eps * (kinetic - potential) / self.h
            }
        }
    }

    /// Per-move increments of `m`, in slice order.
    pub fn increments<'a>(
        &'a self,
        spec: &'a LatticeSpec,
        path: &'a Path,
    ) -> impl Iterator<Item = f64> + 'a {
        path.sites().windows(2).map(move |w| self.step(spec, w[0], w[1]))
    }
}

/// How a value of `m` turns into a path weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// `e^{2πim}`.
    #[default]
    Oscillatory,
    /// `e^{-2πm}`. A validation device with real positive weights.
    Euclidean,
}

impl PhaseMode {
    #[inline]
    pub fn weight(self, m: f64) -> Complex64 {
        match self {
            // Reducing to [-1/2, 1/2] first keeps integer m exactly on 1.
            PhaseMode::Oscillatory => Complex64::cis(TAU * (m - m.round())),
            PhaseMode::Euclidean => Complex64::new((-TAU * m).exp(), 0.0),
        }
    }
}

/// Sum of the move increments, left to right, with no validation and no
/// offset.
pub(crate) fn raw_m(f: &FunctionalSpec, spec: &LatticeSpec, path: &Path) -> f64 {
    let mut m = 0.0;
    for x in f.increments(spec, path) {
        m += x;
    }
    m
}

/// Value of `m` on `path`: the move increments summed in slice order, plus the
/// offset.
pub fn eval_m(f: &FunctionalSpec, spec: &LatticeSpec, path: &Path) -> Result<f64> {
    f.validate()?;
    validate_path(spec, path).map_err(Error::InvalidPath)?;
    Ok(raw_m(f, spec, path) + f.offset)
}

/// Phase weight of a single path, without any normalization constant.
pub fn eval_phase(
    f: &FunctionalSpec,
    mode: PhaseMode,
    spec: &LatticeSpec,
    path: &Path,
) -> Result<Complex64> {
    eval_m(f, spec, path).map(|m| mode.weight(m))
}

/// `f` with its offset moved by `c`.
pub fn shift_functional(f: &FunctionalSpec, c: f64) -> FunctionalSpec {
    FunctionalSpec { offset: f.offset + c, ..*f }
}

/// Discrete rate `Δm_k / ε` for each move of the path.
pub fn m_rate(f: &FunctionalSpec, spec: &LatticeSpec, path: &Path) -> Result<Vec<f64>> {
    f.validate()?;
    validate_path(spec, path).map_err(Error::InvalidPath)?;
    Ok(f.increments(spec, path).map(|dm| dm / spec.eps).collect())
}
