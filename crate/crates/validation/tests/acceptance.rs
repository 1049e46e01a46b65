//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use idiot_crash::general::GeneralLP;
use idiot_crash::idiot::{run_idiot, run_idiot_observed, Choice, IdiotConfig, IdiotState, Observer, Step, Update};
use idiot_crash::instances::random_bounded_lp;
use idiot_crash::lab::{proof_inequality, run_exact_idiot, run_quadratic_penalty, LabConfig, Mode};
use idiot_crash::model::norm2;
use idiot_crash::mps::{parse_mps, read_standard, write_mps};
use idiot_crash::oracle::{solve_by_enumeration, OracleStatus};
use idiot_crash::qap::{aj_linearize, dualize, parse_qaplib, QapInstance};
use idiot_crash::StandardFormLP;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn nug(n: usize) -> QapInstance {
    let text = std::fs::read_to_string(fixture(&format!("nug{n:02}.dat"))).expect("fixture readable");
    parse_qaplib(&text).expect("fixture parses")
}

/// Grid-distance instance for sizes without a shipped fixture; the
/// dimensions depend only on `n`.
fn grid_qap(n: usize) -> QapInstance {
    let w = (n as f64).sqrt().ceil() as usize;
    let pos = |i: usize| ((i / w) as f64, (i % w) as f64);
    let d = (0..n)
        .map(|i| (0..n).map(|j| (pos(i).0 - pos(j).0).abs() + (pos(i).1 - pos(j).1).abs()).collect())
        .collect();
    let f = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { ((i * 7 + j * 7) % 5) as f64 }).collect())
        .collect();
    QapInstance::new(f, d).expect("square matrices")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("{what} took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()))
}

fn exact_instances() -> Vec<(u64, usize, usize)> {
    (0..12u64).map(|s| (s, 2 + (s % 3) as usize, 6 + (s % 3) as usize)).collect()
}

fn qap_dimensions() -> Outcome {
    let expected = [
        (5, (210, 225)),
        (6, (372, 486)),
        (7, (602, 931)),
        (8, (912, 1613)),
        (12, (3192, 8856)),
        (15, (6330, 22275)),
    ];
    let mut wrong = Vec::new();
    let mut timing = Vec::new();
    for (n, dims) in expected {
        let q = if matches!(n, 5 | 6 | 8 | 12) { nug(n) } else { grid_qap(n) };
        let t = Instant::now();
        let lp = aj_linearize(&q).map_err(|e| e.to_string())?;
        let elapsed = t.elapsed();
        let got = (lp.n_rows(), lp.n_cols());
        if got != dims {
            wrong.push(format!("n={n} got {got:?} expected {dims:?}"));
        }
        let limit = if n <= 8 { 1.0 } else { 60.0 };
        if let Err(e) = within(elapsed, limit, &format!("n={n}")) {
            timing.push(e);
        }
    }
    wrong.extend(timing);
    if wrong.is_empty() {
        Ok("all six sizes match".into())
    } else {
        Err(wrong.join("; "))
    }
}

fn exact_mode_suite() -> Outcome {
    let t = Instant::now();
    let mut worst_res: f64 = 0.0;
    let mut worst_gap = f64::NEG_INFINITY;
    for (seed, m, n) in exact_instances() {
        let (inst, f_star) = random_bounded_lp(seed, m, n, 5);
        let traj = run_exact_idiot(&inst.lp, &LabConfig::new(Mode::ExactIdiot), None).map_err(|e| e.to_string())?;
        let last = traj.last();
        ensure(last.mu <= 1e-12, || format!("seed {seed}: mu only reached {:.1e}", last.mu))?;
        let res = last.residual_norm();
        let gap = last.objective - f_star;
        ensure(res <= 1e-6, || format!("seed {seed}: residual {res:.3e}"))?;
        ensure(gap <= 1e-4, || format!("seed {seed}: objective gap {gap:.3e}"))?;
        worst_res = worst_res.max(res);
        worst_gap = worst_gap.max(gap);
    }
    within(t.elapsed(), 30.0, "suite")?;
    Ok(format!("12 LPs, max residual {worst_res:.2e}, max gap {worst_gap:.2e}, {:.2}s", t.elapsed().as_secs_f64()))
}

fn nug05_default() -> Outcome {
    let lp = aj_linearize(&nug(5)).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let out = run_idiot(&lp, &IdiotConfig::default(), None).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let r = out.report.residual_norm;
    let f = out.report.objective;
    ensure(r <= 1e-1, || format!("residual {r:.3e}"))?;
    ensure((50.0..=57.5).contains(&f), || format!("objective {f}"))?;
    within(elapsed, 10.0, "run")?;
    Ok(format!("residual {r:.2e}, objective {f:.4}, {:.3}s", elapsed.as_secs_f64()))
}

#[derive(Default)]
struct DescentWatch {
    prev: Option<f64>,
    worst: f64,
}

impl Observer for DescentWatch {
    fn after_step(&mut self, lp: &StandardFormLP, state: &IdiotState, _j: usize, _step: Step) {
        let h = lp.idiot_objective(&state.x, &state.lambda, state.mu).expect("dimensions fixed");
        if let Some(p) = self.prev {
            self.worst = self.worst.max((h - p) / (1.0 + p.abs()));
        }
        self.prev = Some(h);
    }

    fn after_outer(&mut self, _lp: &StandardFormLP, _state: &IdiotState, _drift: f64) {
        self.prev = None;
    }
}

fn descent_invariant() -> Outcome {
    let mut instances: Vec<(String, StandardFormLP)> = (0..5u64)
        .map(|s| (format!("random seed {s}"), random_bounded_lp(s, 5, 10, 5).0.lp))
        .collect();
    instances.push(("nug05".into(), aj_linearize(&nug(5)).map_err(|e| e.to_string())?));
    instances.push(("nug06".into(), aj_linearize(&nug(6)).map_err(|e| e.to_string())?));
    let mut worst_rise: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    for (name, lp) in &instances {
        let mut watch = DescentWatch::default();
        let out = run_idiot_observed(lp, &IdiotConfig::default(), None, &mut watch).map_err(|e| e.to_string())?;
        let b_inf = lp.b().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        ensure(watch.worst <= 1e-10, || format!("{name}: h rose by {:.3e}", watch.worst))?;
        let drift = out.max_residual_drift / (1.0 + b_inf);
        ensure(drift <= 1e-9, || format!("{name}: residual drift {drift:.3e}"))?;
        worst_rise = worst_rise.max(watch.worst);
        worst_drift = worst_drift.max(drift);
    }
    Ok(format!("{} instances, max relative rise {worst_rise:.1e}, max scaled drift {worst_drift:.1e}", instances.len()))
}

fn proof_inequality_check() -> Outcome {
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    for (seed, m, n) in exact_instances() {
        let (inst, _) = random_bounded_lp(seed, m, n, 5);
        let traj = run_exact_idiot(&inst.lp, &LabConfig::new(Mode::ExactIdiot), None).map_err(|e| e.to_string())?;
        for it in traj.iterates.iter().filter(|it| it.update == Some(Update::Lambda)) {
            let (lhs, rhs) = proof_inequality(&inst.lp, it, &inst.feasible);
            let scale = 1.0 + lhs.abs() + rhs.abs() + it.objective.abs();
            ensure(lhs <= rhs + 1e-8 * scale, || format!("seed {seed} iter {}: {lhs:.6e} > {rhs:.6e}", it.iter))?;
            worst = worst.max((lhs - rhs) / scale);
            checked += 1;
        }
    }
    Ok(format!("{checked} multiplier iterations, max scaled excess {worst:.1e}"))
}

fn penalty_equivalence() -> Outcome {
    let mut count = 0;
    for (seed, m, n) in exact_instances() {
        let (inst, _) = random_bounded_lp(seed, m, n, 5);
        let mut cfg = LabConfig::new(Mode::ExactIdiot);
        cfg.lambda_updates = false;
        let a = run_exact_idiot(&inst.lp, &cfg, None).map_err(|e| e.to_string())?;
        let b = run_quadratic_penalty(&inst.lp, &cfg, None).map_err(|e| e.to_string())?;
        for (x, y) in a.iterates.iter().zip(&b.iterates) {
            let same = x.x.0.iter().zip(&y.x.0).all(|(p, q)| p.to_bits() == q.to_bits())
                && x.mu.to_bits() == y.mu.to_bits()
                && x.h_value.to_bits() == y.h_value.to_bits();
            ensure(same, || format!("seed {seed}: iterates differ at {}", x.iter))?;
        }
        ensure(a.iterates.len() == b.iterates.len(), || format!("seed {seed}: lengths differ"))?;
        count += a.iterates.len();
    }
    Ok(format!("{count} iterates bitwise identical"))
}

fn duality() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let (inst, f) = random_bounded_lp(100 + seed, 3, 5, 5);
        let (dual, map) = dualize(&inst.lp).map_err(|e| e.to_string())?;
        let res = solve_by_enumeration(&dual).map_err(|e| e.to_string())?;
        ensure(res.status == OracleStatus::Optimal, || format!("seed {seed}: dual {:?}", res.status))?;
        let g = map.dual_objective(res.optimum.expect("optimal"));
        let gap = (g - f).abs();
        ensure(gap <= 1e-8 * (1.0 + f.abs()), || format!("seed {seed}: primal {f} dual {g}"))?;
        worst = worst.max(gap);
    }
    let q = parse_qaplib("2  0 1 1 0  0 3 3 0").map_err(|e| e.to_string())?;
    let primal = aj_linearize(&q).map_err(|e| e.to_string())?;
    let (dual, map) = dualize(&primal).map_err(|e| e.to_string())?;
    let out = run_idiot(&dual, &IdiotConfig::default(), None).map_err(|e| e.to_string())?;
    let bound = map.dual_objective(out.report.objective);
    ensure(bound <= 6.0, || format!("Idiot dual objective {bound} exceeds 6"))?;
    Ok(format!("5 LPs, max gap {worst:.1e}; n=2 dual objective {bound:.6} <= 6 ({})", out.status.as_str()))
}

fn mps_round_trip() -> Outcome {
    let mut names = Vec::new();
    let text = std::fs::read_to_string(fixture("ranges.mps")).map_err(|e| e.to_string())?;
    let general = parse_mps(&text).map_err(|e| e.to_string())?;
    let (std_lp, _) = read_standard(&text).map_err(|e| e.to_string())?;
    let written = write_mps(&std_lp, "ranges");
    let (back, map) = read_standard(&written).map_err(|e| e.to_string())?;
    ensure(back == std_lp && map.is_identity(), || "ranges.mps standard form changed".into())?;
    let again: GeneralLP = parse_mps(&write_mps(&back, "ranges")).map_err(|e| e.to_string())?;
    ensure(!general.rows.is_empty() && again.columns.len() == back.n_cols(), || "ranges.mps reparse".into())?;
    names.push("ranges".to_string());
    for n in [5usize, 6, 8, 12] {
        let lp = aj_linearize(&nug(n)).map_err(|e| e.to_string())?;
        let (back, map) = read_standard(&write_mps(&lp, &format!("nug{n:02}"))).map_err(|e| e.to_string())?;
        ensure(back == lp && map.is_identity(), || format!("nug{n:02} changed"))?;
        names.push(format!("nug{n:02} {}x{}", lp.n_rows(), lp.n_cols()));
    }
    for seed in 0..5u64 {
        let lp = random_bounded_lp(seed, 4, 8, 5).0.lp;
        let (back, _) = read_standard(&write_mps(&lp, "rand")).map_err(|e| e.to_string())?;
        ensure(back.without_names() == lp, || format!("random seed {seed} changed"))?;
    }
    names.push("5 random".into());
    Ok(names.join(", "))
}

fn larger_smoke() -> Outcome {
    let lp8 = aj_linearize(&nug(8)).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let out8 = run_idiot(&lp8, &IdiotConfig::default(), None).map_err(|e| e.to_string())?;
    let e8 = t.elapsed();
    let r8 = norm2(&lp8.residual(&out8.point).map_err(|e| e.to_string())?);
    ensure(r8 <= 1e-1, || format!("nug08 residual {r8:.3e}"))?;
    within(e8, 60.0, "nug08")?;

    let lp12 = aj_linearize(&nug(12)).map_err(|e| e.to_string())?;
    let cfg = IdiotConfig { outer_iterations: Choice::Fixed(150), ..IdiotConfig::default() };
    let t = Instant::now();
    let out12 = run_idiot(&lp12, &cfg, None).map_err(|e| e.to_string())?;
    let e12 = t.elapsed();
    let r12 = out12.report.residual_norm;
    let rel = (out12.report.objective - 522.89).abs() / 522.89;
    ensure(r12 <= 1e-2, || format!("nug12 residual {r12:.3e}"))?;
    ensure(rel <= 0.05, || format!("nug12 objective {} off by {:.1}%", out12.report.objective, 100.0 * rel))?;
    within(e12, 600.0, "nug12")?;
    Ok(format!(
        "nug08 residual {r8:.2e} objective {:.4} in {:.2}s; nug12 residual {r12:.2e} objective {:.4} in {:.2}s",
        out8.report.objective,
        e8.as_secs_f64(),
        out12.report.objective,
        e12.as_secs_f64()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("qap dimensions", qap_dimensions),
        ("exact mode vs oracle", exact_mode_suite),
        ("nug05 default run", nug05_default),
        ("inner descent and drift", descent_invariant),
        ("proof inequality", proof_inequality_check),
        ("quadratic penalty equivalence", penalty_equivalence),
        ("duality", duality),
        ("mps round trip", mps_round_trip),
        ("larger instances", larger_smoke),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
