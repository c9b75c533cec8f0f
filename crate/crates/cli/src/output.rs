//! CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use spinswap::coherent::Couplings;
use spinswap::diagnostics::{threshold_estimates, DiagnosticsRecord, Thresholds};
use spinswap::integrate::IntegratorStats;
use spinswap::sector::SnapshotRecord;

use crate::config::{ScenarioConfig, TrajectoryOutput};
use crate::error::{CliError, CliResult};
use crate::scenario::{RunOutput, Scenario, Summary, SweepRow};

pub const OUTPUT_DIR_ENV: &str = "SPINSWAP_OUTPUT_DIR";

/// Flag, then environment, then config.
pub fn output_dir(cfg: &ScenarioConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => cfg.output.dir.clone(),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))
}

pub fn write_trajectory(path: &Path, out: &RunOutput, mode: TrajectoryOutput) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "J2_B", "J2_A", "N_up", "x", "y", "re", "im"])?;
    for (t, rho) in out.trajectory.times.iter().zip(&out.trajectory.states) {
        for e in rho.records() {
            if mode == TrajectoryOutput::Diagonal && e.x + e.y != e.n_up {
                continue;
            }
            w.write_record([
                t.to_string(),
                e.j2_b.to_string(),
                e.j2_a.to_string(),
                e.n_up.to_string(),
                e.x.to_string(),
                e.y.to_string(),
                e.re.to_string(),
                e.im.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord], columns: &[String]) -> CliResult<()> {
    let picks: Vec<usize> = std::iter::once(0)
        .chain(columns.iter().filter_map(|c| DiagnosticsRecord::HEADER.iter().position(|h| h == c)))
        .collect();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(picks.iter().map(|&i| DiagnosticsRecord::HEADER[i]))?;
    for r in records {
        let v = r.values();
        w.write_record(picks.iter().map(|&i| v[i].to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(())
}

#[derive(Serialize)]
struct Snapshot {
    time: f64,
    entries: Vec<SnapshotRecord>,
}

pub fn write_snapshots(path: &Path, out: &RunOutput) -> CliResult<()> {
    let snaps: Vec<Snapshot> = out
        .trajectory
        .times
        .iter()
        .zip(&out.trajectory.states)
        .map(|(t, rho)| Snapshot { time: *t, entries: rho.records() })
        .collect();
    write_json(path, &snaps)
}

pub fn write_sweep(path: &Path, axis: &str, rows: &[SweepRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([axis, "d2_swap_at_t", "d2_initial_at_2t", "trace_drift", "hermiticity_drift"])?;
    for r in rows {
        w.write_record([
            r.value.map(|v| v.to_string()).unwrap_or_default(),
            r.d2_swap_at_t.to_string(),
            r.d2_initial_at_2t.to_string(),
            r.trace_drift.to_string(),
            r.hermiticity_drift.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path.display().to_string(), e))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

#[derive(Serialize)]
pub struct Derived {
    pub period: f64,
    pub couplings: Couplings,
    pub thresholds: Option<Thresholds>,
    pub reduced_dim: usize,
    pub nnz: usize,
    pub one_norm: f64,
}

#[derive(Serialize)]
pub struct ReferenceRun {
    pub couplings: Couplings,
    pub integrator: IntegratorStats,
    pub summary: Summary,
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub program: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a ScenarioConfig,
    pub derived: Option<Derived>,
    pub integrator: Option<IntegratorStats>,
    pub summary: Option<Summary>,
    pub reference: Option<ReferenceRun>,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

impl<'a> Manifest<'a> {
    pub fn new(command: &'static str, config: &'a ScenarioConfig) -> Self {
        Manifest {
            program: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            derived: None,
            integrator: None,
            summary: None,
            reference: None,
            files: Vec::new(),
            wall_time_s: 0.0,
        }
    }
}

pub fn derived(s: &Scenario, out: &RunOutput) -> Derived {
    let sys = &s.config.system;
    Derived {
        period: s.period,
        couplings: s.rates.couplings,
        thresholds: threshold_estimates(sys.j_a, sys.n_up_max, s.config.n_a(), s.config.couplings.gamma_int).ok(),
        reduced_dim: out.reduced_dim,
        nnz: out.nnz,
        one_norm: out.one_norm,
    }
}

/// Writes every artifact of a run into `dir` and returns the file names.
pub fn write_run(dir: &Path, s: &Scenario, out: &RunOutput, reference: Option<&RunOutput>) -> CliResult<Vec<String>> {
    create_dir(dir)?;
    let mut files = Vec::new();
    let o = &s.config.output;
    if o.trajectory != TrajectoryOutput::None {
        write_trajectory(&dir.join("trajectory.csv"), out, o.trajectory)?;
        files.push("trajectory.csv".to_string());
    }
    write_diagnostics(&dir.join("diagnostics.csv"), &out.diagnostics, &o.diagnostics)?;
    files.push("diagnostics.csv".to_string());
    if let Some(r) = reference {
        write_diagnostics(&dir.join("reference_diagnostics.csv"), &r.diagnostics, &o.diagnostics)?;
        files.push("reference_diagnostics.csv".to_string());
    }
    if o.snapshots {
        write_snapshots(&dir.join("snapshots.json"), out)?;
        files.push("snapshots.json".to_string());
    }
    Ok(files)
}

pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    create_dir(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_column_selection() {
        let dir = tempfile::tempdir().unwrap();
        let rec = DiagnosticsRecord {
            time: 0.5,
            trace: 1.0,
            weighted_hs_to_initial: 0.1,
            weighted_hs_to_swap: 0.2,
            q_mean_a: 0.0,
            q_sq_a: 0.0,
            q_mean_b: 3.5,
            q_sq_b: 17.5,
            purity_weighted_a: 1.0,
            purity_weighted_b: 0.1,
            hermiticity_deviation: 0.0,
        };
        let path = dir.path().join("d.csv");
        write_diagnostics(&path, &[rec], &["q_mean_b".into(), "trace".into()]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "time,q_mean_b,trace\n0.5,3.5,1\n");
    }

    #[test]
    fn flag_beats_config() {
        let cfg = ScenarioConfig::from_toml("[system]\nj_a = 1\nn_up_max = 1\n").unwrap();
        assert_eq!(output_dir(&cfg, Some(Path::new("x"))), PathBuf::from("x"));
    }
}
