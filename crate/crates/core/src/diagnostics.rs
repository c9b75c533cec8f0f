//! Distances, qudit moments, purities and decoherence thresholds.
//!
//! All distances use the weighted Hilbert–Schmidt norm, the plain sum of
//! squared coefficient differences. [`unweighted_hs_distance_sq`] divides by
//! the multiplicities and exists only for comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::Superoperator;
use crate::sector::{multiplicity, DoubledIndex, Spin, SymmetricDensity};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Species {
    A,
    B,
}

pub fn weighted_hs_distance_sq(rho: &SymmetricDensity, sigma: &SymmetricDensity) -> f64 {
    let mut sum = 0.0;
    for (k, v) in rho.iter() {
        sum += (v - sigma.get(k)).norm_sqr();
    }
    for (k, v) in sigma.iter() {
        if !rho.contains(k) {
            sum += v.norm_sqr();
        }
    }
    sum
}

/// Distance with every coefficient weighted by `1/(d_{J_A} d_{J_B})` for
/// species of `n_a` and `n_b` spins.
pub fn unweighted_hs_distance_sq(
    rho: &SymmetricDensity,
    sigma: &SymmetricDensity,
    n_a: u32,
    n_b: u32,
) -> Result<f64> {
    let mut keys: Vec<&DoubledIndex> = rho.keys().chain(sigma.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut sum = 0.0;
    for k in keys {
        let d = multiplicity(n_a, k.j_a)? as f64 * multiplicity(n_b, k.j_b)? as f64;
        sum += (rho.get(k) - sigma.get(k)).norm_sqr() / d;
    }
    Ok(sum)
}

/// `(⟨q⟩, ⟨q²⟩)` of one species, averaging over all sectors with their
/// populations as weights.
pub fn qudit_moments(rho: &SymmetricDensity, species: Species) -> (f64, f64) {
    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-6 {
        log::warn!("qudit moments of a state with trace {trace}");
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (k, v) in rho.iter().filter(|(k, _)| k.is_diagonal()) {
        let q = f64::from(match species {
            Species::A => k.ket_a(),
            Species::B => k.ket_b(),
        });
        m1 += v.re * q;
        m2 += v.re * q * q;
    }
    (m1, m2)
}

/// Reduced populations of one species keyed by `(J, q)`. Excitation number
/// conservation makes the reduced states diagonal.
pub fn reduced_populations(rho: &SymmetricDensity, species: Species) -> BTreeMap<(Spin, u32), f64> {
    let mut out = BTreeMap::new();
    for (k, v) in rho.iter().filter(|(k, _)| k.is_diagonal()) {
        let key = match species {
            Species::A => (k.j_a, k.ket_a()),
            Species::B => (k.j_b, k.ket_b()),
        };
        *out.entry(key).or_insert(0.0) += v.re;
    }
    out
}

/// Weighted purity of one species' reduced state.
pub fn purity_weighted(rho: &SymmetricDensity, species: Species) -> f64 {
    reduced_populations(rho, species).values().map(|p| p * p).sum()
}

/// Weighted purity of the whole state, `Σ |ρ|²`.
pub fn purity_full(rho: &SymmetricDensity) -> f64 {
    rho.iter().map(|(_, v)| v.norm_sqr()).sum()
}

/// Trace of each `(J_B, J_A, N↑)` block.
pub fn sector_populations(rho: &SymmetricDensity) -> BTreeMap<(Spin, Spin, u32), f64> {
    let mut out = BTreeMap::new();
    for (k, v) in rho.iter().filter(|(k, _)| k.is_diagonal()) {
        *out.entry((k.j_b, k.j_a, k.n_up)).or_insert(0.0) += v.re;
    }
    out
}

pub fn one_norm(superop: &Superoperator) -> f64 {
    superop.one_norm()
}

/// Rates above which each channel starts to spoil the swap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub gamma_minus: f64,
    pub gamma_z: f64,
    pub kappa_z: f64,
    pub kappa_minus: f64,
}

pub fn threshold_estimates(j: f64, n_up_max: u32, n_a: u32, gamma_int: f64) -> Result<Thresholds> {
    if !(j > 0.0) || n_up_max == 0 || n_a == 0 {
        return Err(Error::Division("threshold_estimates (J, N_up_max and N_A must be positive)"));
    }
    let n = f64::from(n_up_max);
    let denom = f64::from(n_a) / 2.0 - j + n;
    if denom == 0.0 {
        return Err(Error::Division("threshold_estimates (N_A/2 - J + N_up_max = 0)"));
    }
    Ok(Thresholds {
        gamma_minus: gamma_int,
        gamma_z: gamma_int * j / n,
        kappa_z: gamma_int * j * j / f64::from(n_a),
        kappa_minus: gamma_int * n * j / denom,
    })
}

/// One diagnostics row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub trace: f64,
    pub weighted_hs_to_initial: f64,
    pub weighted_hs_to_swap: f64,
    pub q_mean_a: f64,
    pub q_sq_a: f64,
    pub q_mean_b: f64,
    pub q_sq_b: f64,
    pub purity_weighted_a: f64,
    pub purity_weighted_b: f64,
    pub hermiticity_deviation: f64,
}

impl DiagnosticsRecord {
    /// CSV column names, in field order.
    pub const HEADER: [&'static str; 11] = [
        "time",
        "trace",
        "weighted_hs_to_initial",
        "weighted_hs_to_swap",
        "q_mean_a",
        "q_sq_a",
        "q_mean_b",
        "q_sq_b",
        "purity_weighted_a",
        "purity_weighted_b",
        "hermiticity_deviation",
    ];

    pub fn compute(time: f64, rho: &SymmetricDensity, initial: &SymmetricDensity, swap: &SymmetricDensity) -> Self {
        let (q_mean_a, q_sq_a) = qudit_moments(rho, Species::A);
        let (q_mean_b, q_sq_b) = qudit_moments(rho, Species::B);
        DiagnosticsRecord {
            time,
            trace: rho.trace(),
            weighted_hs_to_initial: weighted_hs_distance_sq(rho, initial),
            weighted_hs_to_swap: weighted_hs_distance_sq(rho, swap),
            q_mean_a,
            q_sq_a,
            q_mean_b,
            q_sq_b,
            purity_weighted_a: purity_weighted(rho, Species::A),
            purity_weighted_b: purity_weighted(rho, Species::B),
            hermiticity_deviation: rho.hermiticity_deviation(),
        }
    }

    pub fn values(&self) -> [f64; 11] {
        [
            self.time,
            self.trace,
            self.weighted_hs_to_initial,
            self.weighted_hs_to_swap,
            self.q_mean_a,
            self.q_sq_a,
            self.q_mean_b,
            self.q_sq_b,
            self.purity_weighted_a,
            self.purity_weighted_b,
            self.hermiticity_deviation,
        ]
    }
}
