//! The discretized arena: time slices, bounded integer sites, move sets, and
//! the admissible paths between two endpoints.
//!
//! A site index is the countable coordinate of the point; `site * delta` is its
//! real coordinate. A path carries one site per slice, `n_slices + 1` in all.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveSet {
    /// Consecutive sites differ by at most one.
    Local,
    /// Any site may follow any site.
    AllToAll,
}

impl MoveSet {
    #[inline]
    pub fn admits(self, from: i64, to: i64) -> bool {
        match self {
            MoveSet::Local => (to - from).abs() <= 1,
            MoveSet::AllToAll => true,
        }
    }
}

/// Paths that leave `[site_min, site_max]` are excluded from every sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    HardWall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n_slices: usize,
    /// Time step.
    pub eps: f64,
    /// Site spacing.
    pub delta: f64,
    pub site_min: i64,
    pub site_max: i64,
    pub move_set: MoveSet,
    #[serde(default)]
    pub boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(
        n_slices: usize,
        eps: f64,
        delta: f64,
        site_min: i64,
        site_max: i64,
        move_set: MoveSet,
    ) -> Result<Self> {
        let spec = Self {
            n_slices,
            eps,
            delta,
            site_min,
            site_max,
            move_set,
            boundary: Boundary::HardWall,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_slices < 1 {
            return Err(Error::InvalidLattice("n_slices must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidLattice(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidLattice(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.site_min >= self.site_max {
            return Err(Error::InvalidLattice(format!(
                "site_min ({}) must be below site_max ({})",
                self.site_min, self.site_max
            )));
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        (self.site_max - self.site_min + 1) as usize
    }

    #[inline]
    pub fn contains(&self, site: i64) -> bool {
        (self.site_min..=self.site_max).contains(&site)
    }

    /// Row/column index of `site` in kernel matrices.
    #[inline]
    pub fn index_of(&self, site: i64) -> usize {
        debug_assert!(self.contains(site));
        (site - self.site_min) as usize
    }

    #[inline]
    pub fn site_at(&self, index: usize) -> i64 {
        self.site_min + index as i64
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.site_min..=self.site_max
    }

    /// Real coordinate of a site.
    #[inline]
    pub fn position(&self, site: i64) -> f64 {
        site as f64 * self.delta
    }

    /// Total elapsed time `n_slices * eps`.
    pub fn duration(&self) -> f64 {
        self.n_slices as f64 * self.eps
    }

    /// The same lattice over a different number of slices.
    pub fn with_slices(&self, n_slices: usize) -> Self {
        Self { n_slices, ..self.clone() }
    }

    /// Whether `to` can be reached from `from` in exactly `steps` moves
    /// without leaving the box.
    #[inline]
    pub fn reachable(&self, from: i64, to: i64, steps: usize) -> bool {
        match self.move_set {
            MoveSet::Local => (to - from).unsigned_abs() <= steps as u64,
            MoveSet::AllToAll => steps >= 1 || from == to,
        }
    }

    /// Inclusive range of sites admissible right after `from`.
    #[inline]
    fn successors(&self, from: i64) -> (i64, i64) {
        match self.move_set {
            MoveSet::Local => ((from - 1).max(self.site_min), (from + 1).min(self.site_max)),
            MoveSet::AllToAll => (self.site_min, self.site_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub slice: usize,
    pub site: i64,
}

impl Endpoint {
    pub fn new(slice: usize, site: i64) -> Self {
        Self { slice, site }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<i64>);

impl Path {
    pub fn new(sites: Vec<i64>) -> Self {
        Self(sites)
    }

    pub fn sites(&self) -> &[i64] {
        &self.0
    }

    pub fn into_sites(self) -> Vec<i64> {
        self.0
    }

    /// Number of moves.
    pub fn steps(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn start(&self) -> i64 {
        self.0[0]
    }

    pub fn end(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    /// Sites `[from, to]` inclusive, as a path of its own.
    pub fn slice(&self, from: usize, to: usize) -> Path {
        Path(self.0[from..=to].to_vec())
    }

    /// Largest per-slice site deviation from `other` (Chebyshev distance).
    pub fn max_deviation(&self, other: &Path) -> u64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).unsigned_abs()).max().unwrap_or(0)
    }
}

impl From<Vec<i64>> for Path {
    fn from(sites: Vec<i64>) -> Self {
        Self(sites)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    WrongLength { expected: usize, got: usize },
    OutOfBounds { site: i64 },
    InadmissibleMove { from: i64, to: i64 },
}

/// First point at which a path breaks the lattice rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub slice: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::WrongLength { expected, got } => {
                write!(f, "expected {expected} sites, got {got}")
            }
            ViolationKind::OutOfBounds { site } => {
                write!(f, "site {site} out of bounds at slice {}", self.slice)
            }
            ViolationKind::InadmissibleMove { from, to } => {
                write!(f, "inadmissible move {from} -> {to} at slice {}", self.slice)
            }
        }
    }
}

/// Checks a path against the lattice; the report names the first failing slice.
pub fn validate_path(spec: &LatticeSpec, path: &Path) -> Result<(), Violation> {
    let sites = path.sites();
    let expected = spec.n_slices + 1;
    for (k, &s) in sites.iter().enumerate() {
        if !spec.contains(s) {
            return Err(Violation { slice: k, kind: ViolationKind::OutOfBounds { site: s } });
        }
        if k > 0 && !spec.move_set.admits(sites[k - 1], s) {
            return Err(Violation {
                slice: k,
                kind: ViolationKind::InadmissibleMove { from: sites[k - 1], to: s },
            });
        }
    }
    if sites.len() != expected {
        return Err(Violation {
            slice: sites.len().min(expected),
            kind: ViolationKind::WrongLength { expected, got: sites.len() },
        });
    }
    Ok(())
}

pub(crate) fn check_endpoint(spec: &LatticeSpec, e: Endpoint, which: &'static str) -> Result<()> {
    if e.slice > spec.n_slices {
        return Err(Error::EndpointOutOfBounds {
            which,
            detail: format!("slice {} beyond n_slices {}", e.slice, spec.n_slices),
        });
    }
    if !spec.contains(e.site) {
        return Err(Error::EndpointOutOfBounds {
            which,
            detail: format!("site {} outside [{}, {}]", e.site, spec.site_min, spec.site_max),
        });
    }
    Ok(())
}

/// Validates a pair of endpoints spanning the whole lattice.
pub(crate) fn check_span(spec: &LatticeSpec, a: Endpoint, b: Endpoint) -> Result<()> {
    spec.validate()?;
    check_endpoint(spec, a, "a")?;
    check_endpoint(spec, b, "b")?;
    if a.slice != 0 {
        return Err(Error::EndpointOutOfBounds {
            which: "a",
            detail: format!("start endpoint must sit at slice 0, got {}", a.slice),
        });
    }
    if b.slice != spec.n_slices {
        return Err(Error::EndpointOutOfBounds {
            which: "b",
            detail: format!("end endpoint must sit at slice {}, got {}", spec.n_slices, b.slice),
        });
    }
    Ok(())
}

/// Every admissible path from `a` to `b`, each exactly once, in lexicographic
/// order of the site sequence.
pub fn enumerate_paths(spec: &LatticeSpec, a: Endpoint, b: Endpoint) -> Result<Paths<'_>> {
    check_span(spec, a, b)?;
    Ok(Paths::new(spec, a.site, b.site))
}

/// Lazy depth-first path stream. See [`enumerate_paths`].
#[derive(Debug, Clone)]
pub struct Paths<'a> {
    spec: &'a LatticeSpec,
    end: i64,
    current: Vec<i64>,
    started: bool,
    exhausted: bool,
}

impl<'a> Paths<'a> {
    fn new(spec: &'a LatticeSpec, start: i64, end: i64) -> Self {
        let exhausted = !spec.reachable(start, end, spec.n_slices);
        let mut current = Vec::with_capacity(spec.n_slices + 1);
        current.push(start);
        Self { spec, end, current, started: false, exhausted }
    }

    /// Smallest admissible site for position `k` that follows `prev`, is
    /// greater than `after`, and can still reach the end.
    fn candidate(&self, prev: i64, k: usize, after: Option<i64>) -> Option<i64> {
        let (lo, hi) = self.spec.successors(prev);
        let lo = match after {
            Some(x) => lo.max(x + 1),
            None => lo,
        };
        let remaining = self.spec.n_slices - k;
        (lo..=hi).find(|&c| self.spec.reachable(c, self.end, remaining))
    }

    /// Completes `current` with the smallest continuation. Always succeeds
    /// because every pushed site can reach the end.
    fn fill(&mut self) {
        while self.current.len() <= self.spec.n_slices {
            let k = self.current.len();
            let prev = self.current[k - 1];
            let c = self.candidate(prev, k, None).expect("reachable prefix always extends");
            self.current.push(c);
        }
    }

    /// Moves to the lexicographic successor, or returns false.
    fn advance(&mut self) -> bool {
        while self.current.len() > 1 {
            let k = self.current.len() - 1;
            let last = self.current.pop().unwrap();
            let prev = self.current[k - 1];
            if let Some(c) = self.candidate(prev, k, Some(last)) {
                self.current.push(c);
                self.fill();
                return true;
            }
        }
        false
    }
}

impl Iterator for Paths<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            self.fill();
        } else if !self.advance() {
            self.exhausted = true;
            return None;
        }
        Some(Path(self.current.clone()))
    }
}

/// Number of admissible paths `a -> b`, by a slice-by-slice counting
/// recurrence. Saturates at `u128::MAX`.
pub fn path_count(spec: &LatticeSpec, a: Endpoint, b: Endpoint) -> Result<u128> {
    check_span(spec, a, b)?;
    let counts = count_from(spec, a.site, spec.n_slices);
    Ok(counts[spec.index_of(b.site)])
}

/// Path counts from `start` to every site after `steps` moves.
pub(crate) fn count_from(spec: &LatticeSpec, start: i64, steps: usize) -> Vec<u128> {
    let n = spec.num_sites();
    let mut counts = vec![0u128; n];
    counts[spec.index_of(start)] = 1;
    let mut next = vec![0u128; n];
    for _ in 0..steps {
        match spec.move_set {
            MoveSet::Local => {
                for (j, slot) in next.iter_mut().enumerate() {
                    let lo = j.saturating_sub(1);
                    let hi = (j + 1).min(n - 1);
                    *slot = counts[lo..=hi].iter().fold(0u128, |acc, &c| acc.saturating_add(c));
                }
            }
            MoveSet::AllToAll => {
                let total = counts.iter().fold(0u128, |acc, &c| acc.saturating_add(c));
                next.iter_mut().for_each(|x| *x = total);
            }
        }
        std::mem::swap(&mut counts, &mut next);
    }
    counts
}

/// Number of paths starting at `start` and ending anywhere after the full
/// span. Used for enumeration caps over a whole kernel row.
pub(crate) fn count_row(spec: &LatticeSpec, start: i64) -> u128 {
    count_from(spec, start, spec.n_slices).into_iter().fold(0u128, |acc, c| acc.saturating_add(c))
}
