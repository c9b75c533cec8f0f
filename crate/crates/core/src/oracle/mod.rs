//! Brute-force master equation on the full `2^(N_A+N_B)` space for a few
//! spins, with projection onto the symmetric doubled basis.

mod dicke;
mod sparse;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use dicke::{DickeBasis, OracleSpace};
pub use sparse::{SparseReal, SpinOps};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorOptions, LinearGenerator, Trajectory};
use crate::lindblad::Rates;
use crate::sector::{DoubledIndex, Spin, SymmetricDensity};

/// Largest total number of spins the oracle accepts.
pub const MAX_SPINS: u32 = 12;

/// Dense density matrix; A occupies the low `n_a` bits of the basis label.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    pub n_a: u32,
    pub n_b: u32,
    pub rho: DMatrix<Complex64>,
}

fn check_size(n_a: u32, n_b: u32) -> Result<()> {
    if n_a + n_b > MAX_SPINS {
        return Err(Error::DimensionCap(n_a + n_b));
    }
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidSector("each species needs at least one spin".into()));
    }
    Ok(())
}

impl FullState {
    pub fn from_pure(n_a: u32, n_b: u32, psi: &[Complex64]) -> Result<Self> {
        check_size(n_a, n_b)?;
        let dim = 1usize << (n_a + n_b);
        if psi.len() != dim {
            return Err(Error::OutOfRange(format!("state vector of length {} for dimension {dim}", psi.len())));
        }
        let rho = DMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
        Ok(FullState { n_a, n_b, rho })
    }

    /// Computational basis state with the given sites up.
    pub fn product(n_a: u32, n_b: u32, up_sites: &[u32]) -> Result<Self> {
        check_size(n_a, n_b)?;
        let mut psi = vec![Complex64::new(0.0, 0.0); 1usize << (n_a + n_b)];
        let label = up_sites.iter().fold(0usize, |acc, s| acc | (1usize << s));
        psi[label] = Complex64::new(1.0, 0.0);
        Self::from_pure(n_a, n_b, &psi)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).camax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn to_row_major(&self) -> Vec<Complex64> {
        self.rho.transpose().as_slice().to_vec()
    }

    fn from_row_major(n_a: u32, n_b: u32, v: &[Complex64]) -> Self {
        let dim = 1usize << (n_a + n_b);
        FullState { n_a, n_b, rho: DMatrix::from_row_slice(dim, dim, v) }
    }
}

/// Generator of the full master equation acting on row-major density
/// matrices.
pub struct FullGenerator {
    dim: usize,
    h: SparseReal,
    damping: SparseReal,
    jumps: Vec<(f64, SparseReal)>,
}

impl FullGenerator {
    pub fn new(n_a: u32, n_b: u32, rates: &Rates) -> Result<Self> {
        check_size(n_a, n_b)?;
        rates.validate()?;
        if rates.n_a != n_a {
            return Err(Error::InvalidSector(format!("rates are set for {} A spins, oracle has {n_a}", rates.n_a)));
        }
        let ops = SpinOps { n_total: n_a + n_b };
        let a: Vec<u32> = (0..n_a).collect();
        let b: Vec<u32> = (n_a..n_a + n_b).collect();
        let exchange = ops.j_plus(&a).mul(&ops.j_minus(&b)).add(&ops.j_minus(&a).mul(&ops.j_plus(&b)));
        let c = rates.couplings;
        let jz_total = ops.j_z(&a).add(&ops.j_z(&b));
        let h = exchange
            .scale(c.gamma_int)
            .add(&jz_total.mul(&exchange).scale(c.gamma_m))
            .add(&ops.j_sq(&b).mul(&exchange).scale(c.gamma_j));

        let mut jumps = Vec::new();
        if rates.gamma_z > 0.0 {
            jumps.push((rates.gamma_z, ops.j_z(&a)));
        }
        if rates.gamma_minus > 0.0 {
            jumps.push((rates.gamma_minus, ops.j_minus(&a)));
        }
        for &s in &a {
            if rates.kappa_z > 0.0 {
                jumps.push((rates.kappa_z, ops.z(s)));
            }
            if rates.kappa_minus > 0.0 {
                jumps.push((rates.kappa_minus, ops.sigma_minus(s)));
            }
        }
        let dim = 1usize << (n_a + n_b);
        let mut damping = SparseReal::zeros(dim);
        for (rate, l) in &jumps {
            damping = damping.add(&l.transpose().mul(l).scale(0.5 * rate));
        }
        Ok(FullGenerator { dim, h, damping, jumps })
    }
}

impl LinearGenerator for FullGenerator {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        let (i, one) = (Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0));
        self.h.left_mul_acc(v, -i, out);
        self.h.right_mul_transpose_acc(v, i, out);
        self.damping.left_mul_acc(v, -one, out);
        self.damping.right_mul_transpose_acc(v, -one, out);
        let mut tmp = vec![Complex64::new(0.0, 0.0); v.len()];
        for (rate, l) in &self.jumps {
            tmp.iter_mut().for_each(|t| *t = Complex64::new(0.0, 0.0));
            l.left_mul_acc(v, one, &mut tmp);
            l.right_mul_transpose_acc(&tmp, Complex64::new(*rate, 0.0), out);
        }
    }
}

/// Integrates the full master equation and samples it at `sample_times`.
pub fn full_space_evolve(
    n_a: u32,
    n_b: u32,
    rates: &Rates,
    initial: &FullState,
    sample_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<FullState>> {
    check_size(n_a, n_b)?;
    if (initial.n_a, initial.n_b) != (n_a, n_b) {
        return Err(Error::InvalidSector("initial state has different site counts".into()));
    }
    let gen = FullGenerator::new(n_a, n_b, rates)?;
    let (samples, _) = integrate(&gen, &initial.to_row_major(), 0.0, sample_times, opts)?;
    Ok(samples.iter().map(|v| FullState::from_row_major(n_a, n_b, v)).collect())
}

/// Default bound on the non-symmetric residual accepted by projection.
pub const PROJECTION_TOLERANCE: f64 = 1e-8;

pub fn project_to_symmetric(full: &FullState, tol: f64) -> Result<(SymmetricDensity, f64)> {
    OracleSpace::new(full.n_a, full.n_b)?.project(full, tol)
}

pub fn embed(rho: &SymmetricDensity, n_a: u32, n_b: u32) -> Result<FullState> {
    OracleSpace::new(n_a, n_b)?.embed(rho)
}

/// Largest coefficient deviation between a reduced trajectory and projected
/// full-space states sampled at the same times.
pub fn compare_trajectories(reduced: &Trajectory, full_times: &[f64], full: &[SymmetricDensity]) -> Result<f64> {
    if reduced.times.len() != full_times.len() || full.len() != full_times.len() {
        return Err(Error::TimeGridMismatch(format!(
            "{} reduced samples against {} full samples",
            reduced.times.len(),
            full_times.len()
        )));
    }
    let mut worst = 0.0f64;
    for ((t, a), (s, b)) in reduced.times.iter().zip(&reduced.states).zip(full_times.iter().zip(full)) {
        if (t - s).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::TimeGridMismatch(format!("sample at {t} against {s}")));
        }
        for k in a.keys().chain(b.keys()) {
            worst = worst.max((a.get(k) - b.get(k)).norm());
        }
    }
    Ok(worst)
}

/// Outcome of running the reduced and the full-space simulation side by side.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OracleReport {
    pub max_deviation: f64,
    pub max_projection_residual: f64,
    pub min_eigenvalue: f64,
    pub max_trace_drift: f64,
    pub reduced_dim: usize,
    pub full_dim: usize,
}

/// Evolves `initial` in both representations and compares them at
/// `sample_times`.
pub fn run_comparison(
    n_a: u32,
    n_b: u32,
    rates: &Rates,
    initial: &SymmetricDensity,
    sample_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<OracleReport> {
    let space = OracleSpace::new(n_a, n_b)?;
    let seeds: Vec<DoubledIndex> = initial.keys().copied().collect();
    let superop = crate::lindblad::assemble(&seeds, rates)?;
    let t_final = sample_times.last().copied().unwrap_or(0.0);
    let reduced = crate::integrate::evolve(initial, &superop, t_final, sample_times, opts)?;
    let full_init = space.embed(initial)?;
    let full = full_space_evolve(n_a, n_b, rates, &full_init, sample_times, opts)?;
    let mut projected = Vec::with_capacity(full.len());
    let mut max_residual = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut drift = 0.0f64;
    for state in &full {
        let (p, res) = space.project(state, PROJECTION_TOLERANCE)?;
        max_residual = max_residual.max(res);
        min_eig = min_eig.min(state.min_eigenvalue());
        drift = drift.max((state.trace() - Complex64::new(1.0, 0.0)).norm());
        projected.push(p);
    }
    Ok(OracleReport {
        max_deviation: compare_trajectories(&reduced, sample_times, &projected)?,
        max_projection_residual: max_residual,
        min_eigenvalue: min_eig,
        max_trace_drift: drift,
        reduced_dim: superop.dim(),
        full_dim: space.dim(),
    })
}

/// Deterministic positive test state: a weighted mixture of one pure chain
/// state per `(J_A, J_B, N↑)` block, over every block the two species allow.
pub fn symmetric_test_state(n_a: u32, n_b: u32) -> SymmetricDensity {
    let mut rho = SymmetricDensity::new();
    let mut total = 0.0;
    let spins = |n: u32| (0..=n).filter(move |t| (n - t).is_multiple_of(2)).map(Spin::from_twice);
    for ja in spins(n_a) {
        for jb in spins(n_b) {
            for n in 0..=(ja.twice() + jb.twice()) {
                let xs: Vec<u32> = (0..=n).filter(|x| *x <= ja.twice() && n - x <= jb.twice()).collect();
                let phase = 0.7 * f64::from(ja.twice() + 2 * jb.twice() + 1);
                let mut u: Vec<Complex64> = xs
                    .iter()
                    .map(|x| Complex64::from_polar(1.0 + f64::from(*x) + 0.3 * f64::from(n), phase * f64::from(*x)))
                    .collect();
                let norm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                u.iter_mut().for_each(|c| *c /= norm);
                let weight = 1.0 + f64::from(n) + 0.5 * f64::from(ja.twice()) + 0.25 * f64::from(jb.twice());
                total += weight;
                for (x, ux) in xs.iter().zip(&u) {
                    for (x2, ux2) in xs.iter().zip(&u) {
                        rho.add(DoubledIndex::new(jb, ja, n, *x, n - x2), ux * ux2.conj() * weight);
                    }
                }
            }
        }
    }
    rho.scaled(1.0 / total)
}
