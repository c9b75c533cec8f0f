//! Mirror symmetry, odd commensurability and transfer fidelity of chains.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::TridiagonalChain;
use crate::eigen::{eigensystem, Eigensystem};
use crate::error::{Error, Result};

/// Candidate subdivisions of the smallest gap tried by [`odd_commensurability`].
pub const DEFAULT_MAX_ODD: u32 = 15;
pub const DEFAULT_TOL_REL: f64 = 1e-9;

/// Eigenvalues sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Spectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommensurabilityReport {
    pub is_odd_commensurate: bool,
    pub period: Option<f64>,
    pub odd_integers: Vec<u64>,
    pub residual: f64,
}

/// Largest deviation from palindromic `V` and `C`, relative to the largest
/// coefficient.
pub fn mirror_asymmetry(chain: &TridiagonalChain) -> f64 {
    let scale = chain.scale();
    if scale == 0.0 {
        return 0.0;
    }
    let dev = |v: &[f64]| {
        v.iter()
            .zip(v.iter().rev())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    dev(chain.diag()).max(dev(chain.offdiag())) / scale
}

pub fn mirror_symmetric(chain: &TridiagonalChain, tol: f64) -> bool {
    mirror_asymmetry(chain) <= tol
}

pub fn eigenvalues(chain: &TridiagonalChain) -> Spectrum {
    Spectrum::new(eigensystem(chain).values)
}

fn nearest_odd(r: f64) -> u64 {
    let k = ((r - 1.0) / 2.0).round().max(0.0);
    2 * k as u64 + 1
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn grid_deviation(gaps: &[f64], omega: f64, odd: &[u64]) -> f64 {
    gaps.iter()
        .zip(odd)
        .fold(0.0f64, |m, (g, n)| m.max((g - *n as f64 * omega).abs() / g))
}

/// Tests whether all gaps are odd multiples of one base frequency `π/T`.
///
/// Base frequencies `g_min / k` for odd `k ≤ max_odd` are tried; the best
/// candidate is refined by least squares and accepted when every gap lies
/// within `tol_rel` (relative) of its odd multiple.
pub fn odd_commensurability_with(spectrum: &Spectrum, tol_rel: f64, max_odd: u32) -> Result<CommensurabilityReport> {
    let gaps = spectrum.gaps();
    if gaps.is_empty() {
        return Ok(CommensurabilityReport {
            is_odd_commensurate: true,
            period: None,
            odd_integers: Vec::new(),
            residual: 0.0,
        });
    }
    let span = spectrum.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for (index, &gap) in gaps.iter().enumerate() {
        if gap <= tol_rel * span {
            return Err(Error::DegenerateSpectrum { index, gap });
        }
    }
    let g_min = gaps.iter().copied().fold(f64::INFINITY, f64::min);

    let mut best: Option<(f64, f64, Vec<u64>)> = None;
    for k in (1..=max_odd.max(1)).step_by(2) {
        let omega = g_min / f64::from(k);
        let odd: Vec<u64> = gaps.iter().map(|g| nearest_odd(g / omega)).collect();
        let num: f64 = gaps.iter().zip(&odd).map(|(g, n)| g * *n as f64).sum();
        let den: f64 = odd.iter().map(|n| (*n as f64).powi(2)).sum();
        let fitted = num / den;
        let dev = grid_deviation(&gaps, fitted, &odd);
        if best.as_ref().is_none_or(|(d, _, _)| dev < *d) {
            best = Some((dev, fitted, odd));
        }
        if dev <= tol_rel {
            break;
        }
    }
    let (residual, omega, mut odd) = best.expect("at least one candidate");
    if residual > tol_rel {
        return Ok(CommensurabilityReport {
            is_odd_commensurate: false,
            period: None,
            odd_integers: odd,
            residual,
        });
    }
    let g = odd.iter().copied().fold(0, gcd);
    odd.iter_mut().for_each(|n| *n /= g);
    Ok(CommensurabilityReport {
        is_odd_commensurate: true,
        period: Some(PI / (omega * g as f64)),
        odd_integers: odd,
        residual,
    })
}

pub fn odd_commensurability(spectrum: &Spectrum, tol_rel: f64) -> Result<CommensurabilityReport> {
    odd_commensurability_with(spectrum, tol_rel, DEFAULT_MAX_ODD)
}

/// Spectral propagator `exp(-iHt)` of a chain.
#[derive(Clone, Debug)]
pub struct ChainPropagator {
    es: Eigensystem,
}

impl ChainPropagator {
    pub fn new(chain: &TridiagonalChain) -> Self {
        ChainPropagator { es: eigensystem(chain) }
    }

    pub fn dim(&self) -> usize {
        self.es.values.len()
    }

    /// `⟨to| exp(-iHt) |from⟩`.
    pub fn amplitude(&self, to: usize, from: usize, t: f64) -> Complex64 {
        self.es
            .values
            .iter()
            .zip(&self.es.vectors)
            .map(|(lam, v)| Complex64::from_polar(v[to] * v[from], -lam * t))
            .sum()
    }

    /// Column `exp(-iHt) |from⟩`.
    pub fn column(&self, from: usize, t: f64) -> Vec<Complex64> {
        (0..self.dim()).map(|to| self.amplitude(to, from, t)).collect()
    }
}

/// `|⟨dim-1-x0| exp(-iHt) |x0⟩|²`.
pub fn transfer_fidelity_from(chain: &TridiagonalChain, t: f64, x0: usize) -> Result<f64> {
    if x0 >= chain.dim() {
        return Err(Error::OutOfRange(format!("site {x0} outside chain of length {}", chain.dim())));
    }
    let p = ChainPropagator::new(chain);
    Ok(p.amplitude(chain.dim() - 1 - x0, x0, t).norm_sqr().min(1.0))
}

pub fn transfer_fidelity(chain: &TridiagonalChain, t: f64) -> f64 {
    let p = ChainPropagator::new(chain);
    p.amplitude(chain.dim() - 1, 0, t).norm_sqr().min(1.0)
}

/// Smallest mirror fidelity over all starting sites.
pub fn mirror_fidelity_min(chain: &TridiagonalChain, t: f64) -> f64 {
    let p = ChainPropagator::new(chain);
    let n = chain.dim();
    (0..n)
        .map(|x| p.amplitude(n - 1 - x, x, t).norm_sqr().min(1.0))
        .fold(1.0, f64::min)
}

/// Combined verdict for a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PstReport {
    pub mirror: bool,
    pub odd_commensurate: bool,
    pub period: Option<f64>,
    pub residual: f64,
}

pub fn check_pst(chain: &TridiagonalChain, mirror_tol: f64, tol_rel: f64) -> Result<PstReport> {
    let report = odd_commensurability(&eigenvalues(chain), tol_rel)?;
    Ok(PstReport {
        mirror: mirror_symmetric(chain, mirror_tol),
        odd_commensurate: report.is_odd_commensurate,
        period: report.period,
        residual: report.residual,
    })
}
