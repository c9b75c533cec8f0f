//! Scenario files, figure presets, sweeps and data export for `spinswap`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::time::Instant;

use spinswap::coherent::TridiagonalChain;
use spinswap::oracle::OracleReport;
use spinswap::pst::{check_pst, PstReport};

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{Axis, AxisSpec, Hamiltonian, ScenarioConfig};
pub use error::{CliError, CliResult};
pub use scenario::{sweep, RunOutput, Scenario, Summary, SweepRow};

use output::{Manifest, ReferenceRun};

fn load_with_dir(path: &Path, out: Option<&Path>) -> CliResult<(ScenarioConfig, PathBuf)> {
    let mut cfg = ScenarioConfig::load(path)?;
    let dir = output::output_dir(&cfg, out);
    cfg.output.dir = dir.clone();
    Ok((cfg, dir))
}

/// `run <config>`: returns the output directory.
pub fn cmd_run(path: &Path, out: Option<&Path>) -> CliResult<PathBuf> {
    let start = Instant::now();
    let (cfg, dir) = load_with_dir(path, out)?;
    let scenario = Scenario::new(&cfg)?;
    log::info!("T = {}, {} initial entries", scenario.period, scenario.initial.len());
    let run = scenario.run()?;
    let reference = match &cfg.reference {
        Some(r) => Some(scenario.with_hamiltonian(r.hamiltonian)?.run()?),
        None => None,
    };
    let mut manifest = Manifest::new("run", &scenario.config);
    manifest.files = output::write_run(&dir, &scenario, &run, reference.as_ref())?;
    manifest.derived = Some(output::derived(&scenario, &run));
    manifest.integrator = Some(run.stats());
    manifest.summary = Some(run.summary);
    if let (Some(r), Some(c)) = (&reference, &cfg.reference) {
        manifest.reference = Some(ReferenceRun {
            couplings: scenario::couplings_for(&cfg, c.hamiltonian)?,
            integrator: r.stats(),
            summary: r.summary,
        });
    }
    manifest.files.push("manifest.json".into());
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    output::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(dir)
}

/// `sweep <config>`: with `axis` absent, every `[[sweep]]` table of the
/// config, or a single point when there are none.
pub fn cmd_sweep(path: &Path, axis: Option<AxisSpec>, threads: Option<usize>, out: Option<&Path>) -> CliResult<PathBuf> {
    let start = Instant::now();
    let (cfg, dir) = load_with_dir(path, out)?;
    let axes: Vec<AxisSpec> = match axis {
        Some(a) => vec![a],
        None => cfg.sweep.clone(),
    };
    output::prepare_dir(&dir)?;
    let mut manifest = Manifest::new("sweep", &cfg);
    if axes.is_empty() {
        let rows = sweep(&cfg, None, threads)?;
        output::write_sweep(&dir.join("sweep.csv"), "value", &rows)?;
        manifest.files.push("sweep.csv".into());
    }
    for a in &axes {
        log::info!("sweeping {} over {} points", a.axis.name(), a.points);
        let rows = sweep(&cfg, Some(a), threads)?;
        let name = format!("sweep_{}.csv", a.axis.name());
        output::write_sweep(&dir.join(&name), a.axis.name(), &rows)?;
        manifest.files.push(name);
    }
    let mut echo = cfg.clone();
    echo.sweep = axes;
    manifest.config = &echo;
    manifest.files.push("manifest.json".into());
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    output::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(dir)
}

/// `check-pst <chain-file>`.
pub fn cmd_check_pst(path: &Path, mirror_tol: f64, tol_rel: f64) -> CliResult<PstReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let chain = TridiagonalChain::from_text(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok(check_pst(&chain, mirror_tol, tol_rel)?)
}

/// `oracle-compare <config>`.
pub fn cmd_oracle_compare(path: &Path) -> CliResult<OracleReport> {
    let cfg = ScenarioConfig::load(path)?;
    Scenario::new(&cfg)?.oracle_compare()
}
