//! Scenario files. Every section except `[system]` may be omitted; the
//! resolved config (defaults filled in) is echoed into the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinswap::integrate::IntegratorOptions;
use spinswap::Spin;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub system: SystemConfig,
    #[serde(default)]
    pub couplings: CouplingConfig,
    #[serde(default)]
    pub rates: RateConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub output: OutputConfig,
    /// A second run with a different Hamiltonian, diagnostics only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<AxisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub j_a: f64,
    #[serde(default)]
    pub delta_max: u32,
    pub n_up_max: u32,
    #[serde(default = "one")]
    pub a_level: u32,
    /// Number of A spins; `2 J_A` when absent.
    #[serde(default)]
    pub n_a: Option<u32>,
}

fn one() -> u32 {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hamiltonian {
    /// `γ_M` and `γ_J` from the tuning formulas.
    #[default]
    Tuned,
    /// Exchange only.
    Bare,
    /// No coherent evolution.
    Off,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingConfig {
    pub hamiltonian: Hamiltonian,
    pub gamma_int: f64,
    pub eps_m: f64,
    pub eps_j: f64,
    /// Spin used in the tuning formulas; `J_A` when absent.
    pub tuning_j: Option<f64>,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig { hamiltonian: Hamiltonian::Tuned, gamma_int: 1.0, eps_m: 0.0, eps_j: 0.0, tuning_j: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConfig {
    pub gamma_z: f64,
    pub gamma_minus: f64,
    pub kappa_z: f64,
    pub kappa_minus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    /// End of the run in units of the period.
    pub t_final: f64,
    pub samples_per_period: u32,
    /// Period in absolute time; the tuned swap period of `J_A` when absent.
    pub period: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { t_final: 2.0, samples_per_period: 50, period: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryOutput {
    None,
    /// Population entries only.
    #[default]
    Diagonal,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub trajectory: TrajectoryOutput,
    /// Diagnostics columns to write; `time` is always first.
    pub diagnostics: Vec<String>,
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            trajectory: TrajectoryOutput::Diagonal,
            diagnostics: spinswap::diagnostics::DiagnosticsRecord::HEADER[1..].iter().map(|s| s.to_string()).collect(),
            snapshots: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub hamiltonian: Hamiltonian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    GammaZ,
    GammaMinus,
    KappaZ,
    KappaMinus,
    EpsM,
    EpsJ,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::GammaZ => "gamma_z",
            Axis::GammaMinus => "gamma_minus",
            Axis::KappaZ => "kappa_z",
            Axis::KappaMinus => "kappa_minus",
            Axis::EpsM => "eps_m",
            Axis::EpsJ => "eps_j",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        let all = [Axis::GammaZ, Axis::GammaMinus, Axis::KappaZ, Axis::KappaMinus, Axis::EpsM, Axis::EpsJ];
        all.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<_> = all.iter().map(|a| a.name()).collect();
            CliError::config(format!("unknown axis `{s}`, expected one of {}", names.join(", ")))
        })
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = cfg.clone();
        match self {
            Axis::GammaZ => c.rates.gamma_z = value,
            Axis::GammaMinus => c.rates.gamma_minus = value,
            Axis::KappaZ => c.rates.kappa_z = value,
            Axis::KappaMinus => c.rates.kappa_minus = value,
            Axis::EpsM => c.couplings.eps_m = value,
            Axis::EpsJ => c.couplings.eps_j = value,
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub points: u32,
    #[serde(default)]
    pub log: bool,
}

impl AxisSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.points == 0 {
            return Err(CliError::config("sweep needs at least one point"));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::config("sweep bounds must be finite"));
        }
        if self.log && !(self.from > 0.0 && self.to > 0.0) {
            return Err(CliError::config("log sweep bounds must be positive"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points as usize;
        if n == 1 {
            return vec![self.from];
        }
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if self.log {
                    (self.from.ln() + s * (self.to.ln() - self.from.ln())).exp()
                } else {
                    self.from + s * (self.to - self.from)
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleState {
    /// The scenario's own initial state.
    Initial,
    /// A deterministic mixture touching every block of the two species.
    #[default]
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// Number of B spins; equal to the A count when absent.
    #[serde(default)]
    pub n_b: Option<u32>,
    #[serde(default)]
    pub state: OracleState,
    #[serde(default = "oracle_tolerance")]
    pub tolerance: f64,
}

fn oracle_tolerance() -> f64 {
    1e-6
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| e.in_file(path))
    }

    /// Fills derived defaults and checks every field.
    pub fn resolve(&mut self) -> CliResult<()> {
        let s = &mut self.system;
        let j_a = Spin::from_f64(s.j_a).map_err(|e| CliError::config(format!("system.j_a: {e}")))?;
        let n_a = *s.n_a.get_or_insert(j_a.twice());
        if n_a < j_a.twice() || !(n_a - j_a.twice()).is_multiple_of(2) {
            return Err(CliError::config(format!("system.n_a = {n_a} cannot hold J_A = {j_a}")));
        }
        if s.n_up_max == 0 {
            return Err(CliError::config("system.n_up_max must be positive"));
        }
        if f64::from(s.n_up_max) > j_a.value() {
            return Err(CliError::config(format!("system.n_up_max = {} exceeds J_A = {j_a}", s.n_up_max)));
        }
        if s.a_level > j_a.twice() {
            return Err(CliError::config(format!("system.a_level = {} exceeds 2 J_A = {}", s.a_level, j_a.twice())));
        }
        if s.delta_max > j_a.twice() / 2 {
            return Err(CliError::config(format!("system.delta_max = {} would make J_B negative", s.delta_max)));
        }
        if self.couplings.tuning_j.is_none() {
            self.couplings.tuning_j = Some(self.system.j_a);
        }
        let c = &self.couplings;
        for (name, v) in [("couplings.gamma_int", c.gamma_int), ("couplings.eps_m", c.eps_m), ("couplings.eps_j", c.eps_j)] {
            if !v.is_finite() {
                return Err(CliError::config(format!("{name} must be finite")));
            }
        }
        if c.hamiltonian == Hamiltonian::Tuned && !(c.tuning_j.unwrap_or(0.0) > 0.0) {
            return Err(CliError::config("couplings.tuning_j must be positive"));
        }
        let r = &self.rates;
        for (name, v) in [
            ("rates.gamma_z", r.gamma_z),
            ("rates.gamma_minus", r.gamma_minus),
            ("rates.kappa_z", r.kappa_z),
            ("rates.kappa_minus", r.kappa_minus),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::config(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        let sc = &self.schedule;
        if !(sc.t_final.is_finite() && sc.t_final > 0.0) {
            return Err(CliError::config("schedule.t_final must be positive"));
        }
        if sc.samples_per_period < 2 {
            return Err(CliError::config("schedule.samples_per_period must be at least 2"));
        }
        if let Some(p) = sc.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(CliError::config("schedule.period must be positive"));
            }
        }
        let it = &self.integrator;
        if !(it.rtol > 0.0 && it.atol > 0.0 && it.max_steps > 0) {
            return Err(CliError::config("integrator tolerances and step budget must be positive"));
        }
        for col in &self.output.diagnostics {
            if !spinswap::diagnostics::DiagnosticsRecord::HEADER[1..].contains(&col.as_str()) {
                return Err(CliError::config(format!("output.diagnostics: unknown column `{col}`")));
            }
        }
        for axis in &self.sweep {
            axis.validate()?;
        }
        if let Some(o) = &mut self.oracle {
            o.n_b.get_or_insert(n_a);
            if !(o.tolerance > 0.0) {
                return Err(CliError::config("oracle.tolerance must be positive"));
            }
        }
        Ok(())
    }

    pub fn j_a(&self) -> Spin {
        Spin::from_f64(self.system.j_a).expect("validated in resolve")
    }

    pub fn n_a(&self) -> u32 {
        self.system.n_a.expect("filled in resolve")
    }
}
