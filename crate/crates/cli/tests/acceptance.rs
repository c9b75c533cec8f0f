//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs with its own harness so the lines always reach the console. The
//! process fails when a criterion fails unless it is listed in
//! `KNOWN_FAILURES`, and also when a listed criterion unexpectedly passes.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use spinswap::coherent::{mi_jx_chain, TridiagonalChain};
use spinswap::diagnostics::{qudit_moments, sector_populations, threshold_estimates, Species};
use spinswap::integrate::{uniform_times, IntegratorOptions};
use spinswap::oracle::{run_comparison, symmetric_test_state};
use spinswap::pst::{check_pst, odd_commensurability, transfer_fidelity, Spectrum, DEFAULT_TOL_REL};
use spinswap::Spin;
use spinswap_cli::{sweep, Axis, RunOutput, Scenario, ScenarioConfig, SweepRow};

/// Criteria that fail for reasons recorded in the decisions ledger.
const KNOWN_FAILURES: &[u32] = &[8];

const MI_FIDELITY: f64 = 1.0 - 1e-10;
const CERTIFIED_FIDELITY: f64 = 1.0 - 1e-8;
const ORACLE_DEVIATION: f64 = 1e-6;
const ORACLE_RATE: f64 = 0.1;
const SWAP_FRACTION: f64 = 0.05;
/// Dips after the first pair must stay below this fraction of the initial distance.
const RECURRENCE_FRACTION: f64 = 0.2;
const Q_MEAN_TOL: f64 = 0.1;
const Q_SQ_TOL: f64 = 0.2;
const UNTUNED_FRACTION: f64 = 0.5;
const CONSERVATION_TOL: f64 = 1e-8;
const SECTOR_TOL: f64 = 1e-9;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

#[derive(Default)]
struct Drift {
    trace: f64,
    herm: f64,
    runs: usize,
}

impl Drift {
    fn run(&mut self, out: &RunOutput) {
        self.trace = self.trace.max(out.summary.max_trace_drift);
        self.herm = self.herm.max(out.summary.max_hermiticity_deviation);
        self.runs += 1;
    }

    fn rows(&mut self, rows: &[SweepRow]) {
        for r in rows {
            self.trace = self.trace.max(r.trace_drift);
            self.herm = self.herm.max(r.hermiticity_drift);
            self.runs += 1;
        }
    }
}

fn preset(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.toml"));
    ScenarioConfig::load(&path).unwrap_or_else(|e| panic!("{e}"))
}

fn budget(elapsed: Duration, secs: u64) -> (bool, String) {
    (elapsed <= Duration::from_secs(secs), format!("{:.2}s of {secs}s", elapsed.as_secs_f64()))
}

fn criterion_1() -> (bool, String) {
    let start = Instant::now();
    let mut worst = 1.0f64;
    for twice in 1..=40 {
        let chain = mi_jx_chain(Spin::from_twice(twice), 1.0).expect("chain");
        worst = worst.min(transfer_fidelity(&chain, PI));
    }
    let (fast, time) = budget(start.elapsed(), 1);
    (worst >= MI_FIDELITY && fast, format!("min fidelity 1 - {:.1e} over 2J = 1..40, {time}", 1.0 - worst))
}

/// Mirror-symmetric Jacobi matrix with the given spectrum, by Lanczos on
/// `diag(λ)` started from the persymmetric weights.
fn persymmetric_chain(values: &[f64]) -> TridiagonalChain {
    let n = values.len();
    let mut w: Vec<f64> = (0..n)
        .map(|k| {
            let p: f64 = (0..n).filter(|&j| j != k).map(|j| (values[k] - values[j]).abs()).product();
            1.0 / p
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x = (*x / total).sqrt());
    let mut basis: Vec<Vec<f64>> = vec![w];
    let (mut diag, mut off) = (Vec::new(), Vec::new());
    for k in 0..n {
        let q = &basis[k];
        let mut r: Vec<f64> = q.iter().zip(values).map(|(a, l)| a * l).collect();
        let alpha: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
        diag.push(alpha);
        if k + 1 == n {
            break;
        }
        // full reorthogonalization, twice
        for _ in 0..2 {
            for b in &basis {
                let p: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let beta = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        off.push(beta);
        basis.push(r.into_iter().map(|x| x / beta).collect());
    }
    TridiagonalChain::new(diag, off).expect("valid chain")
}

fn criterion_2() -> (bool, String) {
    let start = Instant::now();
    let mut certified = 0;
    let mut worst = 1.0f64;
    let mut chains: Vec<TridiagonalChain> = Vec::new();
    for n in 2..=12usize {
        for variant in 0..4usize {
            let base = 0.37 + 0.21 * variant as f64;
            let mut values = vec![-1.3];
            for i in 0..n - 1 {
                let odd = 2 * ((i * 7 + n * 3 + variant * 5) % 3) + 1;
                values.push(values[i] + base * odd as f64);
            }
            chains.push(persymmetric_chain(&values));
            // incommensurate spectra and a deliberately asymmetric chain
            let irr: Vec<f64> = (0..n).map(|k| k as f64 + 0.3 * (k as f64).sqrt()).collect();
            chains.push(persymmetric_chain(&irr));
            let mut c = chains.last().unwrap().offdiag().to_vec();
            c[0] *= 1.01;
            chains.push(TridiagonalChain::hopping_only(c).expect("chain"));
        }
    }
    for t in 1..=20 {
        chains.push(mi_jx_chain(Spin::from_twice(t), 1.0 + 0.1 * f64::from(t)).expect("chain"));
    }
    for chain in &chains {
        let Ok(report) = check_pst(chain, 1e-9, DEFAULT_TOL_REL) else { continue };
        if report.mirror && report.odd_commensurate {
            certified += 1;
            let f = report.period.map_or(0.0, |t| transfer_fidelity(chain, t));
            worst = worst.min(f);
        }
    }
    let witness = odd_commensurability(&Spectrum::new(vec![0.0, 1.0, 3.0]), DEFAULT_TOL_REL).expect("nondegenerate");
    let witness_chain = check_pst(&persymmetric_chain(&[0.0, 1.0, 3.0]), 1e-9, DEFAULT_TOL_REL).expect("report");
    let rejected = !witness.is_odd_commensurate && !witness_chain.odd_commensurate;
    let (fast, time) = budget(start.elapsed(), 1);
    (
        worst >= CERTIFIED_FIDELITY && rejected && certified > 40 && fast,
        format!(
            "{certified} of {} chains certified, min fidelity 1 - {:.1e}, {{0,1,3}} rejected: {rejected}, {time}",
            chains.len(),
            1.0 - worst
        ),
    )
}

fn criterion_3() -> (bool, String) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for n in [2u32, 3] {
        let mut cfg = preset("oracle");
        cfg.system.j_a = f64::from(n) / 2.0;
        cfg.system.n_a = Some(n);
        cfg.rates.gamma_z = ORACLE_RATE;
        cfg.rates.gamma_minus = ORACLE_RATE;
        cfg.rates.kappa_z = ORACLE_RATE;
        cfg.rates.kappa_minus = ORACLE_RATE;
        let s = Scenario::new(&cfg).expect("oracle scenario");
        let times = uniform_times(2.0 * s.period, 40);
        let r = run_comparison(n, n, &s.rates, &symmetric_test_state(n, n), &times, &IntegratorOptions::default())
            .expect("comparison");
        worst = worst.max(r.max_deviation);
        detail.push(format!("N={n}: {:.1e}", r.max_deviation));
    }
    let (fast, time) = budget(start.elapsed(), 120);
    (worst <= ORACLE_DEVIATION && fast, format!("max deviation {}, {time}", detail.join(", ")))
}

/// Index of the sample at `k T`.
fn at_period(out: &RunOutput, period: f64, k: f64) -> usize {
    out.trajectory
        .times
        .iter()
        .position(|t| (t - k * period).abs() <= 1e-9 * period)
        .unwrap_or_else(|| panic!("no sample at {k} T"))
}

fn criteria_4_5_6_10(drift: &mut Drift) -> Vec<Outcome> {
    let start = Instant::now();
    let tuned = Scenario::new(&preset("fig1")).expect("fig1");
    let run = tuned.run().expect("fig1 run");
    let elapsed_4 = start.elapsed();
    drift.run(&run);
    let t = tuned.period;
    let d = &run.diagnostics;
    let d0 = d[0].weighted_hs_to_swap;
    let swap_t = d[at_period(&run, t, 1.0)].weighted_hs_to_swap;
    let init_2t = d[at_period(&run, t, 2.0)].weighted_hs_to_initial;
    let mut recur = true;
    let mut dips = Vec::new();
    for k in 1..=6 {
        let i = at_period(&run, t, f64::from(k));
        let value = |j: usize| if k % 2 == 1 { d[j].weighted_hs_to_swap } else { d[j].weighted_hs_to_initial };
        let half = (run.trajectory.times.len() - 1) / 12;
        let neighbours = [i - half, (i + half).min(d.len() - 1)];
        let local_min = neighbours.iter().all(|&j| j == i || value(j) > value(i));
        recur &= value(i) <= RECURRENCE_FRACTION * d0 && local_min;
        dips.push(format!("{:.3}", value(i) / d0));
    }
    let pass_4 = swap_t <= SWAP_FRACTION * d0 && init_2t <= SWAP_FRACTION * d0 && recur && elapsed_4.as_secs() < 60;
    let c4 = Outcome {
        id: 4,
        title: "mixed-state swap with tuned couplings",
        pass: pass_4,
        detail: format!(
            "d0 = {d0:.5}, d2(T)/d0 = {:.4}, d2_init(2T)/d0 = {:.4}, dips/d0 at T..6T = [{}], {:.2}s of 60s",
            swap_t / d0,
            init_2t / d0,
            dips.join(", "),
            elapsed_4.as_secs_f64()
        ),
        elapsed: elapsed_4,
    };

    let i_t = at_period(&run, t, 1.0);
    let (q0, q0_sq) = qudit_moments(&run.trajectory.states[0], Species::B);
    let (q, q_sq) = qudit_moments(&run.trajectory.states[i_t], Species::B);
    let c5 = Outcome {
        id: 5,
        title: "species B purified at T",
        pass: (q - 1.0).abs() <= Q_MEAN_TOL && (q_sq - 1.0).abs() <= Q_SQ_TOL,
        detail: format!("<q>_B: {q0:.3} -> {q:.4}, <q^2>_B: {q0_sq:.3} -> {q_sq:.4}"),
        elapsed: Duration::ZERO,
    };

    let start = Instant::now();
    let bare = Scenario::new(&preset("fig2")).expect("fig2");
    let bare_run = bare.run().expect("fig2 run");
    drift.run(&bare_run);
    let elapsed_6 = start.elapsed();
    let bare_t = bare_run.diagnostics[at_period(&bare_run, bare.period, 1.0)].weighted_hs_to_swap;
    let c6 = Outcome {
        id: 6,
        title: "untuned couplings fail to swap",
        pass: bare_t >= UNTUNED_FRACTION * d0 && swap_t <= SWAP_FRACTION * d0 && elapsed_6.as_secs() < 60,
        detail: format!(
            "untuned d2(T)/d0 = {:.3}, tuned {:.4}, {:.2}s of 60s",
            bare_t / d0,
            swap_t / d0,
            elapsed_6.as_secs_f64()
        ),
        elapsed: elapsed_6,
    };

    // coherent evolution never moves population between (J_B, J_A, N) blocks
    let reference = sector_populations(&run.trajectory.states[0]);
    let mut sector_drift = 0.0f64;
    for rho in run.trajectory.states.iter().chain(&bare_run.trajectory.states) {
        let p = sector_populations(rho);
        for (k, v) in &reference {
            sector_drift = sector_drift.max((p.get(k).copied().unwrap_or(0.0) - v).abs());
        }
        for (k, v) in &p {
            if !reference.contains_key(k) {
                sector_drift = sector_drift.max(v.abs());
            }
        }
    }
    let c10 = Outcome {
        id: 10,
        title: "conservation",
        pass: sector_drift <= SECTOR_TOL,
        detail: format!("coherent per-sector drift {sector_drift:.1e}"),
        elapsed: Duration::ZERO,
    };
    vec![c4, c5, c6, c10]
}

fn criterion_7(drift: &mut Drift) -> (bool, String) {
    let start = Instant::now();
    let cfg = preset("fig3");
    let mut pass = true;
    let mut detail = Vec::new();
    for axis in &cfg.sweep {
        let rows = sweep(&cfg, Some(axis), None).expect("fig3 sweep");
        drift.rows(&rows);
        let values = axis.values();
        let step = (axis.to - axis.from) / f64::from(axis.points - 1);
        let best = rows
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.d2_swap_at_t.total_cmp(&b.1.d2_swap_at_t))
            .map(|(i, _)| i)
            .expect("rows");
        let ok = values[best].abs() <= step * (1.0 + 1e-9);
        pass &= ok;
        detail.push(format!("{} minimum at {:+.2} (d2 = {:.2e})", axis.axis.name(), values[best], rows[best].d2_swap_at_t));
    }
    let (fast, time) = budget(start.elapsed(), 300);
    (pass && fast, format!("{}, {time}", detail.join("; ")))
}

/// Rate at which `d2_swap_at_t` first reaches `2 d_free`, interpolated in
/// log-log between grid points.
fn doubling_rate(values: &[f64], rows: &[SweepRow], d_free: f64) -> Result<f64, String> {
    let target = 2.0 * d_free;
    let i = rows.iter().position(|r| r.d2_swap_at_t >= target).ok_or("never doubles in range")?;
    if i == 0 {
        return Err(format!("already {:.0}x at the lowest rate {:.3}", rows[0].d2_swap_at_t / d_free, values[0]));
    }
    let (x0, x1) = (values[i - 1].ln(), values[i].ln());
    let (y0, y1) = (rows[i - 1].d2_swap_at_t.ln(), rows[i].d2_swap_at_t.ln());
    Ok((x0 + (target.ln() - y0) * (x1 - x0) / (y1 - y0)).exp())
}

fn criterion_8(drift: &mut Drift) -> (bool, String) {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["fig4a", "fig4b", "fig4c", "fig4d"] {
        let cfg = preset(name);
        let axis = cfg.sweep[0].clone();
        let sys = &cfg.system;
        let marks = threshold_estimates(sys.j_a, sys.n_up_max, cfg.n_a(), cfg.couplings.gamma_int).expect("markers");
        let marker = match axis.axis {
            Axis::GammaZ => marks.gamma_z,
            Axis::GammaMinus => marks.gamma_minus,
            Axis::KappaZ => marks.kappa_z,
            Axis::KappaMinus => marks.kappa_minus,
            Axis::EpsM | Axis::EpsJ => unreachable!("fig4 presets sweep rates"),
        };
        let free = sweep(&axis.axis.apply(&cfg, 0.0), None, None).expect("baseline")[0];
        let rows = sweep(&cfg, Some(&axis), None).expect("fig4 sweep");
        drift.rows(&rows);
        drift.rows(&[free]);
        match doubling_rate(&axis.values(), &rows, free.d2_swap_at_t) {
            Ok(rate) => {
                let decades = (rate / marker).log10();
                pass &= decades.abs() <= 1.0;
                detail.push(format!("{}: doubles at {rate:.3e} vs marker {marker}, {decades:+.2} decades", axis.axis.name()));
            }
            Err(why) => {
                pass = false;
                detail.push(format!("{}: {why} (marker {marker})", axis.axis.name()));
            }
        }
        detail.push(format!("baseline d2(T) = {:.2e}", free.d2_swap_at_t));
    }
    let (fast, time) = budget(start.elapsed(), 900);
    (pass && fast, format!("{}, {time}", detail.join("; ")))
}

fn criterion_9(drift: &mut Drift) -> (bool, String) {
    let start = Instant::now();
    let cfg = preset("fig5");
    let swap = Scenario::new(&cfg).expect("fig5");
    let reference = swap.with_hamiltonian(cfg.reference.as_ref().expect("reference run").hamiltonian).expect("decay only");
    let a = swap.run().expect("swap run");
    let b = reference.run().expect("decay-only run");
    drift.run(&a);
    drift.run(&b);
    let da = a.summary.d2_initial_at_2t.expect("2T on grid");
    let db = b.summary.d2_initial_at_2t.expect("2T on grid");
    let (fast, time) = budget(start.elapsed(), 60);
    (da < db && fast, format!("d2_init(2T): swap {da:.4e}, decay only {db:.4e}, {time}"))
}

fn report(o: &Outcome) -> bool {
    let known = KNOWN_FAILURES.contains(&o.id);
    let status = match (o.pass, known) {
        (true, false) => "PASS",
        (false, false) => "FAIL",
        (false, true) => "FAIL (known)",
        (true, true) => "PASS (unexpected, update KNOWN_FAILURES)",
    };
    println!("criterion {:>2} {status}: {} | {}", o.id, o.title, o.detail);
    o.pass != known
}

fn main() {
    // cargo passes harness flags such as --list; only run on a plain invocation
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut drift = Drift::default();
    let mut outcomes = Vec::new();
    let timed = |id, title, f: &mut dyn FnMut() -> (bool, String)| {
        let start = Instant::now();
        let (pass, detail) = f();
        Outcome { id, title, pass, detail, elapsed: start.elapsed() }
    };
    outcomes.push(timed(1, "magnetization inversion is exact", &mut criterion_1));
    outcomes.push(timed(2, "certified chains transfer perfectly", &mut criterion_2));
    outcomes.push(timed(3, "reduced basis matches full space", &mut criterion_3));
    let mut group = criteria_4_5_6_10(&mut drift);
    let c10 = group.pop().expect("conservation outcome");
    outcomes.extend(group);
    outcomes.push(timed(7, "tuning optimum at zero error", &mut || criterion_7(&mut drift)));
    outcomes.push(timed(8, "decoherence thresholds", &mut || criterion_8(&mut drift)));
    outcomes.push(timed(9, "swapping protects against decay", &mut || criterion_9(&mut drift)));
    let conserved = c10.pass && drift.trace <= CONSERVATION_TOL && drift.herm <= CONSERVATION_TOL;
    outcomes.push(Outcome {
        pass: conserved,
        detail: format!(
            "{}, trace drift {:.1e}, Hermiticity drift {:.1e} over {} runs",
            c10.detail, drift.trace, drift.herm, drift.runs
        ),
        ..c10
    });
    outcomes.sort_by_key(|o| o.id);
    let mut ok = true;
    for o in &outcomes {
        ok &= report(o);
    }
    let total: f64 = outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed} of {} criteria pass ({total:.1}s)", outcomes.len());
    if !ok {
        std::process::exit(1);
    }
}
