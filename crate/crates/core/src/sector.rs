//! Permutation-symmetric index spaces and state containers.
//!
//! Spins are stored doubled (`2J`) so half-integer sectors key cleanly.
//! A two-species state is a sparse map over [`DoubledIndex`], where the
//! basis element for `(J_B, J_A, N↑, x, y)` is
//!
//! ```text
//! ket: |J_A, -J_A + x⟩ |J_B, -J_B + N↑ - x⟩
//! bra: ⟨J_A, -J_A + N↑ - y| ⟨J_B, -J_B + y|
//! ```
//!
//! each averaged uniformly over the degeneracy label of its species.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Total spin stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spin(u32);

impl Spin {
    pub const fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    pub const fn integer(j: u32) -> Self {
        Spin(2 * j)
    }

    /// Accepts integers and half-integers only.
    pub fn from_f64(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!("{j} is not a non-negative half-integer")));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Qudit dimension `2J + 1`.
    pub const fn dim(self) -> u32 {
        self.0 + 1
    }

    pub fn checked_add_twice(self, delta_twice: i64) -> Option<Spin> {
        let t = i64::from(self.0) + delta_twice;
        u32::try_from(t).ok().map(Spin)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Binomial coefficient, zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: i64, k: i64) -> Result<u128> {
    if k < 0 || n < 0 || k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        acc = acc.checked_mul(num).ok_or(Error::Overflow("binomial"))? / den;
    }
    Ok(acc)
}

/// A Dicke sector: `n` spin-½ particles with total spin `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinSector {
    pub n: u32,
    pub j: Spin,
}

impl SpinSector {
    pub fn new(n: u32, j: Spin) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSector("spin count must be at least 1".into()));
        }
        if j.twice() > n {
            return Err(Error::InvalidSector(format!("J = {j} exceeds N/2 for N = {n}")));
        }
        if !(n - j.twice()).is_multiple_of(2) {
            return Err(Error::InvalidSector(format!("parity mismatch: N = {n}, 2J = {}", j.twice())));
        }
        Ok(SpinSector { n, j })
    }

    pub fn multiplicity(&self) -> Result<u128> {
        let n = i64::from(self.n);
        let k = (n - i64::from(self.j.twice())) / 2;
        Ok(binomial(n, k)? - binomial(n, k - 1)?)
    }

    /// All total-spin values available to `n` spins, ascending.
    pub fn all(n: u32) -> Vec<SpinSector> {
        (0..=n)
            .filter(|t| (n - t).is_multiple_of(2))
            .map(|t| SpinSector { n, j: Spin(t) })
            .collect()
    }
}

/// Number of degenerate copies `d_J` of spin `j` among `n` spin-½ particles.
pub fn multiplicity(n: u32, j: Spin) -> Result<u128> {
    SpinSector::new(n, j)?.multiplicity()
}

/// Magnetization level `q = M + J` of a spin-`J` qudit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuditLabel {
    pub j: Spin,
    pub q: u32,
}

impl QuditLabel {
    /// Twice the magnetization, `2M = 2q - 2J`.
    pub fn magnetization_twice(&self) -> i64 {
        2 * i64::from(self.q) - i64::from(self.j.twice())
    }
}

/// Maps `M` (given as `2M`) to its qudit level.
pub fn qudit_of_magnetization(j: Spin, m_twice: i64) -> Result<QuditLabel> {
    let jt = i64::from(j.twice());
    if m_twice.abs() > jt || (jt - m_twice) % 2 != 0 {
        return Err(Error::OutOfRange(format!("2M = {m_twice} not a level of J = {j}")));
    }
    Ok(QuditLabel { j, q: ((m_twice + jt) / 2) as u32 })
}

/// Basis label of the doubled permutation-symmetric space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DoubledIndex {
    pub j_b: Spin,
    pub j_a: Spin,
    pub n_up: u32,
    pub x: u32,
    pub y: u32,
}

impl DoubledIndex {
    pub const fn new(j_b: Spin, j_a: Spin, n_up: u32, x: u32, y: u32) -> Self {
        DoubledIndex { j_b, j_a, n_up, x, y }
    }

    pub fn ket_a(&self) -> u32 {
        self.x
    }

    pub fn bra_a(&self) -> u32 {
        self.n_up - self.y
    }

    pub fn ket_b(&self) -> u32 {
        self.n_up - self.x
    }

    pub fn bra_b(&self) -> u32 {
        self.y
    }

    /// Index of the Hermitian-conjugate basis element.
    pub fn adjoint(&self) -> DoubledIndex {
        DoubledIndex { x: self.n_up - self.y, y: self.n_up - self.x, ..*self }
    }

    /// Ket equals bra for both species.
    pub fn is_diagonal(&self) -> bool {
        self.x + self.y == self.n_up
    }

    /// Every qudit level lies inside its species' `[0, 2J]` range.
    pub fn is_admissible(&self) -> bool {
        let (ja, jb) = (self.j_a.twice(), self.j_b.twice());
        self.x <= self.n_up
            && self.y <= self.n_up
            && self.ket_a() <= ja
            && self.bra_a() <= ja
            && self.ket_b() <= jb
            && self.bra_b() <= jb
    }
}

impl fmt::Display for DoubledIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(J_B={}, J_A={}, N_up={}, x={}, y={})",
            self.j_b, self.j_a, self.n_up, self.x, self.y
        )
    }
}

/// One coefficient of a state snapshot, in the exported record layout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    #[serde(rename = "J2_B")]
    pub j2_b: u32,
    #[serde(rename = "J2_A")]
    pub j2_a: u32,
    #[serde(rename = "N_up")]
    pub n_up: u32,
    pub x: u32,
    pub y: u32,
    pub re: f64,
    pub im: f64,
}

pub const DEFAULT_DROP_TOLERANCE: f64 = 1e-14;
const TRACE_IMAG_TOLERANCE: f64 = 1e-10;

/// Sparse coefficient map `ρ_{J_B, J_A, N↑, x, y}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymmetricDensity {
    entries: BTreeMap<DoubledIndex, Complex64>,
}

impl SymmetricDensity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (DoubledIndex, Complex64)>>(it: I) -> Self {
        let mut rho = Self::new();
        for (k, v) in it {
            rho.add(k, v);
        }
        rho
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &DoubledIndex) -> Complex64 {
        self.entries.get(idx).copied().unwrap_or_default()
    }

    pub fn contains(&self, idx: &DoubledIndex) -> bool {
        self.entries.contains_key(idx)
    }

    pub fn insert(&mut self, idx: DoubledIndex, value: Complex64) {
        self.entries.insert(idx, value);
    }

    pub fn add(&mut self, idx: DoubledIndex, value: Complex64) {
        *self.entries.entry(idx).or_default() += value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DoubledIndex, &Complex64)> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &DoubledIndex> {
        self.entries.keys()
    }

    /// Complex trace; the imaginary part vanishes for Hermitian states.
    pub fn trace_complex(&self) -> Complex64 {
        self.entries
            .iter()
            .filter(|(k, _)| k.is_diagonal())
            .map(|(_, v)| *v)
            .sum()
    }

    pub fn trace(&self) -> f64 {
        let tr = self.trace_complex();
        if tr.im.abs() > TRACE_IMAG_TOLERANCE {
            log::warn!("hermiticity violation: trace has imaginary part {:e}", tr.im);
        }
        tr.re
    }

    /// `max |ρ_k - conj(ρ_{k†})|` over the support.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.entries
            .iter()
            .map(|(k, v)| (v - self.get(&k.adjoint()).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `(ρ + ρ†) / 2`.
    pub fn hermitize(&self) -> SymmetricDensity {
        let mut out = SymmetricDensity::new();
        for k in self.entries.keys() {
            let adj = k.adjoint();
            let v = 0.5 * (self.get(k) + self.get(&adj).conj());
            out.entries.insert(*k, v);
            out.entries.insert(adj, v.conj());
        }
        out
    }

    /// Drops coefficients with modulus below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.entries.retain(|_, v| v.norm() >= tol);
    }

    pub fn scaled(&self, factor: f64) -> SymmetricDensity {
        SymmetricDensity {
            entries: self.entries.iter().map(|(k, v)| (*k, v * factor)).collect(),
        }
    }

    pub fn records(&self) -> Vec<SnapshotRecord> {
        self.entries
            .iter()
            .map(|(k, v)| SnapshotRecord {
                j2_b: k.j_b.twice(),
                j2_a: k.j_a.twice(),
                n_up: k.n_up,
                x: k.x,
                y: k.y,
                re: v.re,
                im: v.im,
            })
            .collect()
    }

    pub fn from_records(records: &[SnapshotRecord]) -> Self {
        Self::from_entries(records.iter().map(|r| {
            (
                DoubledIndex::new(Spin(r.j2_b), Spin(r.j2_a), r.n_up, r.x, r.y),
                Complex64::new(r.re, r.im),
            )
        }))
    }
}

fn mixture_sectors(j_a: Spin, delta_max: u32, n_up_max: u32, level: u32) -> Result<Vec<Spin>> {
    if n_up_max == 0 {
        return Err(Error::InvalidSector("N_up,max must be at least 1".into()));
    }
    if delta_max > 0 && 2 * delta_max >= j_a.twice() {
        return Err(Error::InvalidSector(format!(
            "Δ_max = {delta_max} must be smaller than J_A = {j_a}"
        )));
    }
    if j_a.twice() < 2 * n_up_max {
        return Err(Error::InvalidSector(format!(
            "J_A = {j_a} must be at least N_up,max = {n_up_max}"
        )));
    }
    if level > j_a.twice() {
        return Err(Error::OutOfRange(format!("qudit level {level} outside J_A = {j_a}")));
    }
    let d = i64::from(delta_max);
    (-d..=d)
        .map(|delta| {
            j_a.checked_add_twice(2 * delta)
                .ok_or_else(|| Error::InvalidSector("negative J_B".into()))
        })
        .collect()
}

fn uniform_mixture(
    j_a: Spin,
    delta_max: u32,
    n_up_max: u32,
    level: u32,
    entry: impl Fn(Spin, u32) -> DoubledIndex,
) -> Result<SymmetricDensity> {
    let sectors = mixture_sectors(j_a, delta_max, n_up_max, level)?;
    let weight = 1.0 / (f64::from(n_up_max) * f64::from(2 * delta_max + 1));
    let mut rho = SymmetricDensity::new();
    for j_b in sectors {
        for k in 0..n_up_max {
            let idx = entry(j_b, k);
            if !idx.is_admissible() {
                return Err(Error::InvalidSector(format!("{idx} is not admissible")));
            }
            rho.insert(idx, Complex64::new(weight, 0.0));
        }
    }
    Ok(rho)
}

/// Species A pure in `a_level`; species B uniformly mixed over
/// `J_B ∈ [J_A - Δ_max, J_A + Δ_max]` and levels `0..N_up,max`.
pub fn build_initial_state(
    j_a: Spin,
    delta_max: u32,
    n_up_max: u32,
    a_level: u32,
) -> Result<SymmetricDensity> {
    uniform_mixture(j_a, delta_max, n_up_max, a_level, |j_b, b| {
        DoubledIndex::new(j_b, j_a, a_level + b, a_level, b)
    })
}

/// The swapped counterpart of [`build_initial_state`]: species A mixed over
/// levels `0..N_up,max`, species B pure in `pure_level` for every `J_B`.
pub fn build_swap_state(
    j_a: Spin,
    delta_max: u32,
    n_up_max: u32,
    pure_level: u32,
) -> Result<SymmetricDensity> {
    uniform_mixture(j_a, delta_max, n_up_max, pure_level, |j_b, a| {
        DoubledIndex::new(j_b, j_a, a + pure_level, a, pure_level)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn multiplicity_small_cases() {
        assert_eq!(multiplicity(2, Spin::integer(1)).unwrap(), 1);
        assert_eq!(multiplicity(2, Spin::integer(0)).unwrap(), 1);
        assert_eq!(multiplicity(4, Spin::integer(1)).unwrap(), 3);
        assert_eq!(multiplicity(5, Spin::from_twice(1)).unwrap(), 5);
    }

    #[test]
    fn multiplicity_rejects_parity_mismatch() {
        assert!(matches!(multiplicity(3, Spin::integer(1)), Err(Error::InvalidSector(_))));
        assert!(multiplicity(2, Spin::integer(2)).is_err());
    }

    #[test]
    fn multiplicity_completeness() {
        for n in 1..=12u32 {
            let total: u128 = SpinSector::all(n)
                .iter()
                .map(|s| u128::from(s.j.dim()) * s.multiplicity().unwrap())
                .sum();
            assert_eq!(total, 1u128 << n, "N = {n}");
        }
    }

    #[test]
    fn qudit_levels() {
        let j = Spin::integer(50);
        assert_eq!(qudit_of_magnetization(j, -100).unwrap().q, 0);
        assert_eq!(qudit_of_magnetization(j, -98).unwrap().q, 1);
        let half = Spin::from_twice(3);
        let top = qudit_of_magnetization(half, 3).unwrap();
        assert_eq!(top.q, 3);
        assert_eq!(top.magnetization_twice(), 3);
        assert!(matches!(qudit_of_magnetization(j, 102), Err(Error::OutOfRange(_))));
        assert!(qudit_of_magnetization(half, 2).is_err());
    }

    #[test]
    fn spin_parsing_and_display() {
        assert_eq!(Spin::from_f64(1.5).unwrap(), Spin::from_twice(3));
        assert!(Spin::from_f64(0.3).is_err());
        assert_eq!(Spin::from_twice(3).to_string(), "3/2");
        assert_eq!(Spin::integer(50).to_string(), "50");
    }

    #[test]
    fn trace_of_single_entries() {
        let j = Spin::integer(5);
        let diag = SymmetricDensity::from_entries([(DoubledIndex::new(j, j, 2, 1, 1), c(0.3))]);
        assert!((diag.trace() - 0.3).abs() < 1e-15);
        let off = SymmetricDensity::from_entries([(DoubledIndex::new(j, j, 2, 0, 1), c(0.5))]);
        assert_eq!(off.trace(), 0.0);
    }

    #[test]
    fn paper_initial_state_has_72_equal_entries() {
        let rho = build_initial_state(Spin::integer(50), 4, 8, 1).unwrap();
        assert_eq!(rho.len(), 72);
        for (k, v) in rho.iter() {
            assert!(k.is_diagonal());
            assert!((v.re - 1.0 / 72.0).abs() < 1e-15 && v.im == 0.0);
        }
        assert!((rho.trace() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_mixture_is_single_entry() {
        let j = Spin::integer(50);
        let rho = build_initial_state(j, 0, 1, 0).unwrap();
        assert_eq!(rho.len(), 1);
        assert_eq!(rho.get(&DoubledIndex::new(j, j, 0, 0, 0)), c(1.0));
        assert_eq!(build_swap_state(j, 0, 1, 0).unwrap(), rho);
    }

    #[test]
    fn swap_state_layout() {
        let j = Spin::integer(50);
        let rho = build_swap_state(j, 4, 8, 1).unwrap();
        assert_eq!(rho.len(), 72);
        for k in rho.keys() {
            assert!(k.is_diagonal());
            assert_eq!(k.ket_b(), 1);
            assert_eq!(k.bra_b(), 1);
            assert!(k.ket_a() < 8);
        }
    }

    #[test]
    fn initial_and_swap_share_coefficient_multiset() {
        let j = Spin::integer(20);
        let a = build_initial_state(j, 2, 5, 3).unwrap();
        let b = build_swap_state(j, 2, 5, 3).unwrap();
        let mut va: Vec<f64> = a.iter().map(|(_, v)| v.re).collect();
        let mut vb: Vec<f64> = b.iter().map(|(_, v)| v.re).collect();
        va.sort_by(f64::total_cmp);
        vb.sort_by(f64::total_cmp);
        assert_eq!(va, vb);
    }

    #[test]
    fn builders_reject_bad_arguments() {
        let j = Spin::integer(3);
        assert!(matches!(build_initial_state(j, 3, 2, 0), Err(Error::InvalidSector(_))));
        assert!(build_initial_state(j, 0, 4, 0).is_err());
        assert!(build_initial_state(j, 1, 2, 7).is_err());
    }

    #[test]
    fn hermitize_fixes_initial_state() {
        let rho = build_initial_state(Spin::integer(10), 2, 4, 1).unwrap();
        assert_eq!(rho.hermitize(), rho);
        assert_eq!(rho.hermiticity_deviation(), 0.0);
    }

    #[test]
    fn records_round_trip() {
        let j = Spin::from_twice(7);
        let rho = SymmetricDensity::from_entries([
            (DoubledIndex::new(j, j, 2, 0, 1), Complex64::new(0.1, -0.2)),
            (DoubledIndex::new(j, j, 2, 1, 1), c(0.7)),
        ]);
        let json = serde_json::to_string(&rho.records()).unwrap();
        assert!(json.contains("\"J2_A\":7"));
        let back: Vec<SnapshotRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(SymmetricDensity::from_records(&back), rho);
    }
}
