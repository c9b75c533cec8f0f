//! Total-spin eigenbases `|J, q, ξ⟩` of a few spins and the change of basis
//! between the computational and the doubled symmetric representation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sparse::SpinOps;
use super::FullState;
use crate::error::{Error, Result};
use crate::sector::{multiplicity, DoubledIndex, Spin, SpinSector, SymmetricDensity};

const GRAM_SCHMIDT_CUTOFF: f64 = 1e-8;

/// Dicke basis of `n` spins. Highest-weight vectors come from Gram–Schmidt
/// over computational states in ascending order, the rest from `J_-`.
#[derive(Clone, Debug)]
pub struct DickeBasis {
    pub n: u32,
    vectors: HashMap<(Spin, u32, u32), Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl DickeBasis {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > 12 {
            return Err(Error::DimensionCap(n));
        }
        let dim = 1usize << n;
        let sites: Vec<u32> = (0..n).collect();
        let jm = SpinOps { n_total: n }.j_minus(&sites);
        let mut vectors = HashMap::new();
        // vectors already placed, keyed by 2M
        let mut by_m: HashMap<i64, Vec<Vec<f64>>> = HashMap::new();

        for sector in SpinSector::all(n).into_iter().rev() {
            let j = sector.j;
            let jt = i64::from(j.twice());
            let ups = ((i64::from(n) + jt) / 2) as u32;
            let count = sector.multiplicity()? as usize;
            let mut found: Vec<Vec<f64>> = Vec::new();
            let existing = by_m.get(&jt).cloned().unwrap_or_default();
            for s in (0..dim).filter(|s| s.count_ones() == ups) {
                if found.len() == count {
                    break;
                }
                let mut v = vec![0.0; dim];
                v[s] = 1.0;
                for u in existing.iter().chain(&found) {
                    let p = u[s];
                    if p != 0.0 {
                        v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
                    }
                }
                // second pass against rounding
                for u in existing.iter().chain(&found) {
                    let p = dot(u, &v);
                    v.iter_mut().zip(u).for_each(|(a, b)| *a -= p * b);
                }
                let norm = dot(&v, &v).sqrt();
                if norm > GRAM_SCHMIDT_CUTOFF {
                    v.iter_mut().for_each(|a| *a /= norm);
                    found.push(v);
                }
            }
            if found.len() != count {
                return Err(Error::InvalidSector(format!("found {} of {count} highest weights for J = {j}", found.len())));
            }
            for (xi, hw) in found.into_iter().enumerate() {
                let mut v = hw;
                for q in (0..=j.twice()).rev() {
                    let m2 = -jt + 2 * i64::from(q);
                    by_m.entry(m2).or_default().push(v.clone());
                    let next = if q > 0 {
                        // J_-|J,M⟩ = √((J+M)(J-M+1)) |J,M-1⟩
                        let c = (((jt + m2) * (jt - m2 + 2)) as f64 / 4.0).sqrt();
                        Some(jm.apply(&v).into_iter().map(|a| a / c).collect())
                    } else {
                        None
                    };
                    vectors.insert((j, q, xi as u32), std::mem::take(&mut v));
                    if let Some(lower) = next {
                        v = lower;
                    }
                }
            }
        }
        Ok(DickeBasis { n, vectors })
    }

    pub fn vector(&self, j: Spin, q: u32, xi: u32) -> Option<&[f64]> {
        self.vectors.get(&(j, q, xi)).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn labels(&self) -> Vec<(Spin, u32, u32)> {
        let mut l: Vec<_> = self.vectors.keys().copied().collect();
        l.sort();
        l
    }
}

type Label = (Spin, u32, u32, Spin, u32, u32);

/// Two species and the orthogonal matrix whose columns are the product
/// Dicke states.
#[derive(Clone, Debug)]
pub struct OracleSpace {
    pub n_a: u32,
    pub n_b: u32,
    u: DMatrix<Complex64>,
    labels: Vec<Label>,
    lookup: HashMap<Label, usize>,
}

impl OracleSpace {
    pub fn new(n_a: u32, n_b: u32) -> Result<Self> {
        if n_a + n_b > 12 {
            return Err(Error::DimensionCap(n_a + n_b));
        }
        let (ba, bb) = (DickeBasis::new(n_a)?, DickeBasis::new(n_b)?);
        let dim = 1usize << (n_a + n_b);
        let mut labels = Vec::with_capacity(dim);
        for la in ba.labels() {
            for lb in bb.labels() {
                labels.push((la.0, la.1, la.2, lb.0, lb.1, lb.2));
            }
        }
        let mut u = DMatrix::<Complex64>::zeros(dim, dim);
        for (col, l) in labels.iter().enumerate() {
            let va = ba.vector(l.0, l.1, l.2).expect("label from basis");
            let vb = bb.vector(l.3, l.4, l.5).expect("label from basis");
            for (b, wb) in vb.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                for (a, wa) in va.iter().enumerate().filter(|(_, w)| **w != 0.0) {
                    u[(a | (b << n_a), col)] = Complex64::new(wa * wb, 0.0);
                }
            }
        }
        let lookup = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        Ok(OracleSpace { n_a, n_b, u, labels, lookup })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    fn weights(&self, j_a: Spin, j_b: Spin) -> Result<(u32, u32)> {
        let da = multiplicity(self.n_a, j_a)?;
        let db = multiplicity(self.n_b, j_b)?;
        Ok((da as u32, db as u32))
    }

    /// Full-space state with every coefficient spread uniformly over `ξ`.
    pub fn embed(&self, rho: &SymmetricDensity) -> Result<FullState> {
        let mut dicke = DMatrix::<Complex64>::zeros(self.dim(), self.dim());
        for (k, c) in rho.iter() {
            let (da, db) = self.weights(k.j_a, k.j_b)?;
            let w = c / f64::from(da * db);
            for xa in 0..da {
                for xb in 0..db {
                    let ket = (k.j_a, k.ket_a(), xa, k.j_b, k.ket_b(), xb);
                    let bra = (k.j_a, k.bra_a(), xa, k.j_b, k.bra_b(), xb);
                    let (Some(&r), Some(&c)) = (self.lookup.get(&ket), self.lookup.get(&bra)) else {
                        return Err(Error::InvalidSector(format!("{k} does not fit {} + {} spins", self.n_a, self.n_b)));
                    };
                    dicke[(r, c)] += w;
                }
            }
        }
        let full = &self.u * dicke * self.u.adjoint();
        Ok(FullState { n_a: self.n_a, n_b: self.n_b, rho: full })
    }

    /// Symmetric coefficients of `full` and the Frobenius norm of the part
    /// they do not describe. Fails when that residual exceeds `tol`.
    pub fn project(&self, full: &FullState, tol: f64) -> Result<(SymmetricDensity, f64)> {
        if (full.n_a, full.n_b) != (self.n_a, self.n_b) {
            return Err(Error::InvalidSector("state and basis disagree on site counts".into()));
        }
        let dicke = self.u.adjoint() * &full.rho * &self.u;
        let mut out = SymmetricDensity::new();
        for (r, ket) in self.labels.iter().enumerate() {
            for (c, bra) in self.labels.iter().enumerate() {
                let v = dicke[(r, c)];
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(k) = doubled(ket, bra) {
                    out.add(k, v);
                }
            }
        }
        let rebuilt = self.embed(&out)?;
        let residual = (&full.rho - &rebuilt.rho).norm();
        if residual > tol {
            return Err(Error::ProjectionInvalid(residual));
        }
        out.prune(1e-15);
        Ok((out, residual))
    }
}

/// Doubled index of the ket/bra pair when both share `ξ`, `J` and `N↑`.
fn doubled(ket: &Label, bra: &Label) -> Option<DoubledIndex> {
    let same = ket.0 == bra.0 && ket.2 == bra.2 && ket.3 == bra.3 && ket.5 == bra.5;
    let n = ket.1 + ket.4;
    if !same || bra.1 + bra.4 != n {
        return None;
    }
    Some(DoubledIndex::new(ket.3, ket.0, n, ket.1, bra.4))
}
