//! Turning a config into states, generators and runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spinswap::coherent::{swap_period_tuned, tune_params, Couplings};
use spinswap::diagnostics::{weighted_hs_distance_sq, DiagnosticsRecord};
use spinswap::integrate::{evolve, uniform_times, IntegratorStats, Trajectory};
use spinswap::lindblad::{assemble, Rates, Superoperator};
use spinswap::oracle::{run_comparison, symmetric_test_state, OracleReport};
use spinswap::sector::{build_initial_state, build_swap_state};
use spinswap::{DoubledIndex, Spin, SymmetricDensity};

use crate::config::{AxisSpec, Hamiltonian, OracleState, ScenarioConfig};
use crate::error::{CliError, CliResult};

/// Relative tolerance for locating multiples of the period on a sample grid.
const GRID_MATCH: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub j_a: Spin,
    pub rates: Rates,
    pub period: f64,
    pub initial: SymmetricDensity,
    pub swap: SymmetricDensity,
}

pub fn couplings_for(cfg: &ScenarioConfig, hamiltonian: Hamiltonian) -> CliResult<Couplings> {
    let c = &cfg.couplings;
    Ok(match hamiltonian {
        Hamiltonian::Tuned => {
            tune_params(c.tuning_j.unwrap_or(cfg.system.j_a), c.gamma_int)?.with_tuning_errors(c.eps_m, c.eps_j)
        }
        Hamiltonian::Bare => Couplings::bare(c.gamma_int),
        Hamiltonian::Off => Couplings::zero(),
    })
}

impl Scenario {
    pub fn new(config: &ScenarioConfig) -> CliResult<Self> {
        let mut config = config.clone();
        config.resolve()?;
        let j_a = config.j_a();
        let s = &config.system;
        let couplings = couplings_for(&config, config.couplings.hamiltonian)?;
        let r = &config.rates;
        let rates = Rates {
            couplings,
            gamma_z: r.gamma_z,
            gamma_minus: r.gamma_minus,
            kappa_z: r.kappa_z,
            kappa_minus: r.kappa_minus,
            n_a: config.n_a(),
        };
        rates.validate()?;
        let period = match config.schedule.period {
            Some(p) => p,
            None => swap_period_tuned(j_a.value(), config.couplings.gamma_int)?,
        };
        if !(period.is_finite() && period > 0.0) {
            return Err(CliError::config(format!("swap period {period} is not positive; set schedule.period")));
        }
        let initial = build_initial_state(j_a, s.delta_max, s.n_up_max, s.a_level)?;
        let swap = build_swap_state(j_a, s.delta_max, s.n_up_max, s.a_level)?;
        Ok(Scenario { config, j_a, rates, period, initial, swap })
    }

    pub fn seeds(&self) -> Vec<DoubledIndex> {
        self.initial.keys().copied().collect()
    }

    pub fn superoperator(&self) -> CliResult<Superoperator> {
        Ok(assemble(&self.seeds(), &self.rates)?)
    }

    /// Same scenario under a different Hamiltonian, rates unchanged.
    pub fn with_hamiltonian(&self, hamiltonian: Hamiltonian) -> CliResult<Self> {
        let mut s = self.clone();
        s.config.couplings.hamiltonian = hamiltonian;
        s.rates.couplings = couplings_for(&self.config, hamiltonian)?;
        Ok(s)
    }

    pub fn t_final(&self) -> f64 {
        self.config.schedule.t_final * self.period
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let sc = &self.config.schedule;
        let n = (sc.t_final * f64::from(sc.samples_per_period)).ceil().max(1.0) as usize;
        uniform_times(self.t_final(), n)
    }

    pub fn evolve(&self, times: &[f64]) -> CliResult<(Trajectory, Superoperator)> {
        let superop = self.superoperator()?;
        let t_final = times.last().copied().unwrap_or(0.0);
        let traj = evolve(&self.initial, &superop, t_final, times, &self.config.integrator)?;
        Ok((traj, superop))
    }

    pub fn run(&self) -> CliResult<RunOutput> {
        let times = self.sample_times();
        let (trajectory, superop) = self.evolve(&times)?;
        let diagnostics = self.diagnostics(&trajectory);
        Ok(RunOutput {
            summary: Summary::from_run(self, &trajectory, &diagnostics),
            reduced_dim: superop.dim(),
            nnz: superop.nnz(),
            one_norm: superop.one_norm(),
            trajectory,
            diagnostics,
        })
    }

    pub fn diagnostics(&self, traj: &Trajectory) -> Vec<DiagnosticsRecord> {
        traj.times
            .iter()
            .zip(&traj.states)
            .map(|(t, rho)| DiagnosticsRecord::compute(*t, rho, &self.initial, &self.swap))
            .collect()
    }

    /// Distances at `T` and `2T` and the trace drift, from a two-sample run.
    pub fn sweep_point(&self, value: Option<f64>) -> CliResult<SweepRow> {
        let times = [self.period, 2.0 * self.period];
        let (traj, _) = self.evolve(&times)?;
        let drift = traj.states.iter().map(|r| (r.trace() - 1.0).abs()).fold(0.0, f64::max);
        let herm = traj.states.iter().map(SymmetricDensity::hermiticity_deviation).fold(0.0, f64::max);
        Ok(SweepRow {
            value,
            d2_swap_at_t: weighted_hs_distance_sq(&traj.states[0], &self.swap),
            d2_initial_at_2t: weighted_hs_distance_sq(&traj.states[1], &self.initial),
            trace_drift: drift,
            hermiticity_drift: herm,
        })
    }

    pub fn oracle_compare(&self) -> CliResult<OracleReport> {
        let oracle = self.config.oracle.clone().unwrap_or(crate::config::OracleConfig {
            n_b: None,
            state: OracleState::Mixed,
            tolerance: 1e-6,
        });
        let n_a = self.config.n_a();
        let n_b = oracle.n_b.unwrap_or(n_a);
        let state = match oracle.state {
            OracleState::Mixed => symmetric_test_state(n_a, n_b),
            OracleState::Initial => self.initial.clone(),
        };
        let report = run_comparison(n_a, n_b, &self.rates, &state, &self.sample_times(), &self.config.integrator)?;
        if report.max_deviation > oracle.tolerance {
            return Err(CliError::Check(format!(
                "reduced and full trajectories differ by {:e} (tolerance {:e})",
                report.max_deviation, oracle.tolerance
            )));
        }
        Ok(report)
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub summary: Summary,
    pub reduced_dim: usize,
    pub nnz: usize,
    pub one_norm: f64,
}

impl RunOutput {
    pub fn stats(&self) -> IntegratorStats {
        self.trajectory.stats
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub d2_swap_initial: f64,
    pub d2_swap_at_t: Option<f64>,
    pub d2_initial_at_2t: Option<f64>,
    pub max_trace_drift: f64,
    pub max_hermiticity_deviation: f64,
}

impl Summary {
    fn from_run(s: &Scenario, traj: &Trajectory, diag: &[DiagnosticsRecord]) -> Self {
        let at = |k: f64| {
            let t = k * s.period;
            traj.times.iter().position(|x| (x - t).abs() <= GRID_MATCH * s.period)
        };
        Summary {
            d2_swap_initial: weighted_hs_distance_sq(&s.initial, &s.swap),
            d2_swap_at_t: at(1.0).map(|i| diag[i].weighted_hs_to_swap),
            d2_initial_at_2t: at(2.0).map(|i| diag[i].weighted_hs_to_initial),
            max_trace_drift: diag.iter().map(|d| (d.trace - 1.0).abs()).fold(0.0, f64::max),
            max_hermiticity_deviation: diag.iter().map(|d| d.hermiticity_deviation).fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: Option<f64>,
    pub d2_swap_at_t: f64,
    pub d2_initial_at_2t: f64,
    pub trace_drift: f64,
    pub hermiticity_drift: f64,
}

/// One row per grid point in parameter order; a single unlabelled row when
/// `axis` is `None`.
pub fn sweep(cfg: &ScenarioConfig, axis: Option<&AxisSpec>, threads: Option<usize>) -> CliResult<Vec<SweepRow>> {
    let Some(axis) = axis else {
        return Ok(vec![Scenario::new(cfg)?.sweep_point(None)?]);
    };
    axis.validate()?;
    let points: Vec<f64> = axis.values();
    let work = || -> CliResult<Vec<SweepRow>> {
        points
            .par_iter()
            .map(|&v| {
                log::debug!("{} = {v}", axis.axis.name());
                Scenario::new(&axis.axis.apply(cfg, v))?.sweep_point(Some(v))
            })
            .collect()
    };
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}
