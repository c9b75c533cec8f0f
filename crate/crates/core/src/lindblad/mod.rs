//! Sparse superoperator of the master equation in the doubled basis.
//!
//! The index set is the closure of a seed support under every active channel,
//! so any state supported on the seeds stays inside it for all times.

mod channels;

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use channels::{
    Channel, CollectiveDecay, CollectiveDephasing, Coherent, LocalDecay, LocalDephasing, Transitions,
};

use crate::coherent::Couplings;
use crate::error::{Error, Result};
use crate::sector::{DoubledIndex, SymmetricDensity};

/// Coherent couplings and the four decoherence rates, all acting on species A.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub couplings: Couplings,
    pub gamma_z: f64,
    pub gamma_minus: f64,
    pub kappa_z: f64,
    pub kappa_minus: f64,
    pub n_a: u32,
}

impl Rates {
    pub fn coherent(couplings: Couplings, n_a: u32) -> Self {
        Rates { couplings, gamma_z: 0.0, gamma_minus: 0.0, kappa_z: 0.0, kappa_minus: 0.0, n_a }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.couplings;
        for (name, v) in [("gamma_int", c.gamma_int), ("gamma_m", c.gamma_m), ("gamma_j", c.gamma_j)] {
            if !v.is_finite() {
                return Err(Error::OutOfRange(format!("{name} = {v}")));
            }
        }
        for (name, v) in [
            ("gamma_z", self.gamma_z),
            ("gamma_minus", self.gamma_minus),
            ("kappa_z", self.kappa_z),
            ("kappa_minus", self.kappa_minus),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::OutOfRange(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(())
    }
}

/// Row-compressed sparse generator over a fixed index set.
#[derive(Clone, Debug)]
pub struct Superoperator {
    basis: Vec<DoubledIndex>,
    lookup: HashMap<DoubledIndex, usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Superoperator {
    /// Closes `seeds` under `channels` (each with its rate) and compiles the
    /// weighted sum of their matrix elements. Duplicate entries are merged.
    pub fn build<'a, I>(channels: &[(f64, &dyn Channel)], seeds: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a DoubledIndex>,
    {
        let active: Vec<(f64, &dyn Channel)> =
            channels.iter().copied().filter(|(rate, _)| *rate != 0.0).collect();

        let mut known: BTreeSet<DoubledIndex> = BTreeSet::new();
        let mut queue = Vec::new();
        for s in seeds {
            if !s.is_admissible() {
                return Err(Error::SectorViolation(s.to_string()));
            }
            if known.insert(*s) {
                queue.push(*s);
            }
        }
        let mut triplets: Vec<(DoubledIndex, DoubledIndex, Complex64)> = Vec::new();
        let mut buf = Vec::new();
        while let Some(src) = queue.pop() {
            for (rate, ch) in &active {
                buf.clear();
                ch.transitions(&src, &mut buf)?;
                for (target, w) in buf.drain(..) {
                    if !target.is_admissible() {
                        return Err(Error::SectorViolation(format!("{} from {src} via {}", target, ch.name())));
                    }
                    if known.insert(target) {
                        queue.push(target);
                    }
                    triplets.push((src, target, w * *rate));
                }
            }
        }

        let basis: Vec<DoubledIndex> = known.into_iter().collect();
        let lookup: HashMap<DoubledIndex, usize> =
            basis.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut coo: Vec<(usize, usize, Complex64)> =
            triplets.into_iter().map(|(s, t, w)| (lookup[&t], lookup[&s], w)).collect();
        coo.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; basis.len() + 1];
        let mut cols = Vec::with_capacity(coo.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(coo.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, w) in coo {
            if last == Some((r, c)) {
                *vals.last_mut().expect("merged entry exists") += w;
            } else {
                cols.push(c);
                vals.push(w);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..basis.len() {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Superoperator { basis, lookup, row_ptr, cols, vals })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn basis(&self) -> &[DoubledIndex] {
        &self.basis
    }

    pub fn index_of(&self, idx: &DoubledIndex) -> Option<usize> {
        self.lookup.get(idx).copied()
    }

    /// `(source, target, weight)` for every stored entry.
    pub fn triplets(&self) -> impl Iterator<Item = (DoubledIndex, DoubledIndex, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.basis[self.cols[k]], self.basis[r], self.vals[k]))
        })
    }

    /// Stored weight from `source` to `target`, zero if absent.
    pub fn weight(&self, source: &DoubledIndex, target: &DoubledIndex) -> Complex64 {
        let (Some(s), Some(t)) = (self.index_of(source), self.index_of(target)) else {
            return Complex64::new(0.0, 0.0);
        };
        let range = self.row_ptr[t]..self.row_ptr[t + 1];
        match self.cols[range.clone()].binary_search(&s) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `out = L v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            *o = acc;
        }
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut col = vec![0.0; self.dim()];
        for (c, v) in self.cols.iter().zip(&self.vals) {
            col[*c] += v.norm();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    /// Largest `|Σ_{diagonal targets} L[t, s]|` over sources, zero for a
    /// trace-annihilating generator.
    pub fn trace_residual(&self) -> f64 {
        let mut col = vec![Complex64::new(0.0, 0.0); self.dim()];
        for r in 0..self.dim() {
            if self.basis[r].is_diagonal() {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    col[self.cols[k]] += self.vals[k];
                }
            }
        }
        col.into_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn to_vector(&self, rho: &SymmetricDensity) -> Result<Vec<Complex64>> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (k, val) in rho.iter() {
            let i = self
                .index_of(k)
                .ok_or_else(|| Error::SectorViolation(format!("{k} lies outside the generator's index set")))?;
            v[i] = *val;
        }
        Ok(v)
    }

    /// Rebuilds a state, dropping entries with modulus at most `drop_tol`.
    pub fn from_vector(&self, v: &[Complex64], drop_tol: f64) -> SymmetricDensity {
        SymmetricDensity::from_entries(
            self.basis
                .iter()
                .zip(v)
                .filter(|(_, c)| c.norm() > drop_tol)
                .map(|(k, c)| (*k, *c)),
        )
    }

    pub fn apply_to_density(&self, rho: &SymmetricDensity) -> Result<SymmetricDensity> {
        let v = self.to_vector(rho)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(&v, &mut out);
        Ok(self.from_vector(&out, 0.0))
    }
}

fn single(channel: &dyn Channel, seeds: &[DoubledIndex]) -> Result<Superoperator> {
    Superoperator::build(&[(1.0, channel)], seeds)
}

/// `-i[H, ·]` with couplings as given.
pub fn coherent_superop(seeds: &[DoubledIndex], couplings: Couplings) -> Result<Superoperator> {
    single(&Coherent { couplings }, seeds)
}

pub fn collective_dephasing_superop(seeds: &[DoubledIndex]) -> Result<Superoperator> {
    single(&CollectiveDephasing, seeds)
}

pub fn collective_decay_superop(seeds: &[DoubledIndex]) -> Result<Superoperator> {
    single(&CollectiveDecay, seeds)
}

pub fn local_dephasing_superop(seeds: &[DoubledIndex], n_a: u32) -> Result<Superoperator> {
    single(&LocalDephasing { n_a }, seeds)
}

pub fn local_decay_superop(seeds: &[DoubledIndex], n_a: u32) -> Result<Superoperator> {
    single(&LocalDecay { n_a }, seeds)
}

/// Full generator for `rates`, closed over `seeds`.
pub fn assemble(seeds: &[DoubledIndex], rates: &Rates) -> Result<Superoperator> {
    rates.validate()?;
    let coherent = Coherent { couplings: rates.couplings };
    let dephasing = LocalDephasing { n_a: rates.n_a };
    let decay = LocalDecay { n_a: rates.n_a };
    Superoperator::build(
        &[
            (1.0, &coherent),
            (rates.gamma_z, &CollectiveDephasing),
            (rates.gamma_minus, &CollectiveDecay),
            (rates.kappa_z, &dephasing),
            (rates.kappa_minus, &decay),
        ],
        seeds,
    )
}
