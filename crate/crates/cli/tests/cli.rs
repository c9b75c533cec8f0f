use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spinswap_cli::ScenarioConfig;

const SMALL: &str = r#"
name = "small"

[system]
j_a = 6
delta_max = 1
n_up_max = 3

[rates]
gamma_minus = 0.1

[reference]
hamiltonian = "off"

[schedule]
t_final = 2.0
samples_per_period = 6

[output]
trajectory = "full"
snapshots = true
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spinswap"));
    c.env_remove("SPINSWAP_OUTPUT_DIR");
    c
}

fn presets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn every_preset_parses() {
    let mut n = 0;
    for entry in fs::read_dir(presets()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert_eq!(n, 9);
}

#[test]
fn run_writes_artifacts_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let files = ["trajectory.csv", "diagnostics.csv", "reference_diagnostics.csv", "snapshots.json"];
    let mut contents = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let out = bin().arg("run").arg(&cfg).arg("--out").arg(&dir).output().unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        contents.push(files.map(|f| fs::read(dir.join(f)).unwrap()));
    }
    assert_eq!(contents[0], contents[1]);

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["config"]["system"]["n_a"], 12);
    assert_eq!(manifest["config"]["couplings"]["tuning_j"], 6.0);
    assert_eq!(manifest["config"]["integrator"]["rtol"], 1e-9);
    assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(manifest["integrator"]["accepted"].as_u64().unwrap() > 0);
    let swap = manifest["summary"]["d2_initial_at_2t"].as_f64().unwrap();
    let decay_only = manifest["reference"]["summary"]["d2_initial_at_2t"].as_f64().unwrap();
    assert!(swap < decay_only);

    // the echoed config reproduces the run
    let echo: ScenarioConfig = serde_json::from_value(manifest["config"].clone()).unwrap();
    let echo_path = write(tmp.path(), "echo.toml", &toml::to_string(&echo).unwrap());
    let dir = tmp.path().join("c");
    let out = bin().arg("run").arg(&echo_path).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(dir.join("diagnostics.csv")).unwrap(), contents[0][1]);

    let diag = String::from_utf8(contents[0][1].clone()).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 11);
    assert_eq!(lines.count(), 13);
    let traj = String::from_utf8(contents[0][0].clone()).unwrap();
    assert!(traj.starts_with("time,J2_B,J2_A,N_up,x,y,re,im\n"));
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let dir = tmp.path().join("env");
    let out = bin().arg("run").arg(&cfg).env("SPINSWAP_OUTPUT_DIR", &dir).output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn sweep_from_flags_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "small.toml", SMALL);
    let dir = tmp.path().join("flags");
    let out = bin()
        .args(["sweep"])
        .arg(&cfg)
        .args(["--axis", "eps_m", "--from", "-0.5", "--to", "0.5", "--points", "3", "--threads", "2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.join("sweep_eps_m.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["eps_m", "d2_swap_at_t", "d2_initial_at_2t", "trace_drift", "hermiticity_drift"]
    );
    let values: Vec<f64> = rdr.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
    assert_eq!(values, vec![-0.5, 0.0, 0.5]);

    // no axis and no [[sweep]] tables: one unlabelled row
    let dir = tmp.path().join("single");
    let out = bin().arg("sweep").arg(&cfg).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with(','));

    let with_axes = format!("{SMALL}\n[[sweep]]\naxis = \"kappa_z\"\nfrom = 0.01\nto = 1.0\npoints = 3\nlog = true\n");
    let cfg = write(tmp.path(), "axes.toml", &with_axes);
    let dir = tmp.path().join("axes");
    let out = bin().arg("sweep").arg(&cfg).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(dir.join("sweep_kappa_z.csv")).unwrap().lines().count(), 4);
}

#[test]
fn check_pst_reports_json() {
    let out = bin().arg("check-pst").arg(presets().join("mi_j3.chain")).output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mirror"], true);
    assert_eq!(v["odd_commensurate"], true);
    assert!((v["period"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-9);
    assert!(v["residual"].as_f64().unwrap() < 1e-9);

    let tmp = tempfile::tempdir().unwrap();
    let asym = write(tmp.path(), "asym.chain", "V: 0 0 0\nC: 1 2\n");
    let out = bin().arg("check-pst").arg(&asym).output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mirror"], false);

    let bad = write(tmp.path(), "bad.chain", "V: 0 0\nC: 1 2 3\n");
    assert_eq!(code(&bin().arg("check-pst").arg(&bad).output().unwrap()), 2);
    assert_eq!(code(&bin().arg("check-pst").arg(tmp.path().join("missing")).output().unwrap()), 2);
}

#[test]
fn oracle_compare_preset() {
    let out = bin().arg("oracle-compare").arg(presets().join("oracle.toml")).output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["full_dim"], 64);

    let tmp = tempfile::tempdir().unwrap();
    let strict = fs::read_to_string(presets().join("oracle.toml")).unwrap().replace("tolerance = 1e-6", "tolerance = 1e-30");
    let cfg = write(tmp.path(), "strict.toml", &strict);
    assert_eq!(code(&bin().arg("oracle-compare").arg(&cfg).output().unwrap()), 3);
}

#[test]
fn exit_codes_for_bad_configs_and_numeric_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let typo = write(tmp.path(), "typo.toml", "[system]\nj_a = 6\nn_up_max = 3\n\n[rates]\ngama_z = 1\n");
    let out = bin().arg("run").arg(&typo).arg("--out").arg(tmp.path().join("x")).output().unwrap();
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gama_z") && err.contains("line 6"), "{err}");

    let missing = tmp.path().join("nope.toml");
    assert_eq!(code(&bin().arg("run").arg(&missing).output().unwrap()), 2);

    let starved = format!("{SMALL}\n[integrator]\nmax_steps = 3\n");
    let cfg = write(tmp.path(), "starved.toml", &starved);
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path().join("y")).output().unwrap();
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let out = bin().arg("sweep").arg(&cfg).args(["--axis", "nope", "--from", "0", "--to", "1", "--points", "2"]).output().unwrap();
    assert_eq!(code(&out), 2);
}
