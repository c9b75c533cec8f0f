//! Adaptive Dormand–Prince 5(4) integration of `dv/dt = L v`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::Superoperator;
use crate::sector::{SymmetricDensity, DEFAULT_DROP_TOLERANCE};

/// Anything that can apply a linear map to a complex vector.
pub trait LinearGenerator {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[Complex64], out: &mut [Complex64]);
}

impl LinearGenerator for Superoperator {
    fn dim(&self) -> usize {
        Superoperator::dim(self)
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        Superoperator::apply(self, v, out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; estimated from the generator when absent.
    pub initial_step: Option<f64>,
    pub max_steps: u64,
    /// Consecutive rejections tolerated before giving up.
    pub max_rejections: u32,
    /// Entries at or below this modulus are dropped from exported snapshots.
    pub drop_tolerance: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-9,
            atol: 1e-12,
            initial_step: None,
            max_steps: 50_000_000,
            max_rejections: 60,
            drop_tolerance: DEFAULT_DROP_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
    pub min_step: f64,
    pub max_step: f64,
}

// Dormand–Prince tableau (the generator is autonomous, so no nodes)
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c.norm()))
}

/// Integrates `v` from `t0` and records it at each of `sample_times`
/// (ascending, none before `t0`). Steps are clipped to land on samples.
pub fn integrate<G: LinearGenerator>(
    gen: &G,
    v0: &[Complex64],
    t0: f64,
    sample_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<(Vec<Vec<Complex64>>, IntegratorStats)> {
    let n = gen.dim();
    if v0.len() != n {
        return Err(Error::OutOfRange(format!("state length {} for generator of size {n}", v0.len())));
    }
    if let Some(bad) = sample_times.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::TimeGridMismatch(format!("sample times not ascending at {}", bad[1])));
    }
    if sample_times.first().is_some_and(|t| *t < t0) || sample_times.iter().any(|t| !t.is_finite()) {
        return Err(Error::TimeGridMismatch("sample times must be finite and not before the start".into()));
    }

    let mut stats = IntegratorStats { min_step: f64::INFINITY, ..Default::default() };
    let mut y = v0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    let mut t = t0;
    let mut out = Vec::with_capacity(sample_times.len());

    gen.apply(&y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = match opts.initial_step {
        Some(h) if h > 0.0 => h,
        _ => {
            let (d0, d1) = (max_abs(&y), max_abs(&k[0]));
            if d1 > 1e-300 && d0 > 1e-300 {
                0.01 * d0 / d1
            } else {
                1e-3
            }
        }
    };
    let mut rejections = 0u32;

    for &target in sample_times {
        while t < target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::Integration { t_last: t, reason: "step budget exhausted".into() });
            }
            let remaining = target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += k[j][i] * (step * a);
                        }
                    }
                    tmp[i] = acc;
                }
                gen.apply(&tmp, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&tmp);
                }
            }
            stats.evaluations += 6;

            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (j, ej) in E.iter().enumerate() {
                    if *ej != 0.0 {
                        e += k[j][i] * ej;
                    }
                }
                let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err = err.max((e * step).norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::Integration { t_last: t, reason: "non-finite state".into() });
            }

            if err <= 1.0 {
                t = if landing { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                stats.accepted += 1;
                stats.min_step = stats.min_step.min(step);
                stats.max_step = stats.max_step.max(step);
                rejections = 0;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // a step shortened to land on a sample says nothing about the next one
                h = if landing { h.max(step * factor) } else { step * factor };
            } else {
                stats.rejected += 1;
                rejections += 1;
                if rejections > opts.max_rejections {
                    return Err(Error::Integration {
                        t_last: t,
                        reason: format!("{rejections} consecutive step rejections"),
                    });
                }
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
                if h <= f64::EPSILON * t.abs().max(1e-300) {
                    return Err(Error::Integration { t_last: t, reason: "step size underflow".into() });
                }
            }
        }
        out.push(y.clone());
    }
    if stats.accepted == 0 {
        stats.min_step = 0.0;
    }
    Ok((out, stats))
}

/// States sampled along a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SymmetricDensity>,
    pub stats: IntegratorStats,
}

/// Evolves `state` under `superop` and samples it at `sample_times`, which
/// must be strictly increasing within `[0, t_final]`.
pub fn evolve(
    state: &SymmetricDensity,
    superop: &Superoperator,
    t_final: f64,
    sample_times: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    if !(t_final >= 0.0) {
        return Err(Error::OutOfRange(format!("t_final = {t_final}")));
    }
    if let Some(w) = sample_times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::TimeGridMismatch(format!("times {} and {} not strictly increasing", w[0], w[1])));
    }
    if sample_times.iter().any(|t| !(*t >= 0.0 && *t <= t_final)) {
        return Err(Error::TimeGridMismatch(format!("sample times must lie in [0, {t_final}]")));
    }
    let v0 = superop.to_vector(state)?;
    let (samples, stats) = integrate(superop, &v0, 0.0, sample_times, opts)?;
    Ok(Trajectory {
        times: sample_times.to_vec(),
        states: samples.iter().map(|v| superop.from_vector(v, opts.drop_tolerance)).collect(),
        stats,
    })
}

/// `n + 1` evenly spaced times from 0 to `t_final`.
pub fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|k| t_final * k as f64 / n as f64).collect()
}
