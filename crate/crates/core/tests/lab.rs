use idiot_crash::instances::random_bounded_lp;
use idiot_crash::lab::{
    minimize_subproblem, proof_inequality, run, run_exact_idiot, run_quadratic_penalty, LabConfig, LabError, Mode,
    MultiplierUpdate,
};
use idiot_crash::model::Point;
use idiot_crash::oracle::solve_by_enumeration;
use idiot_crash::StandardFormLP;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lp(c: Vec<f64>, rows: &[Vec<f64>], b: Vec<f64>) -> StandardFormLP {
    StandardFormLP::from_dense(c, rows, b).unwrap()
}

fn h(lp: &StandardFormLP, x: &[f64], lambda: &[f64], mu: f64) -> f64 {
    let mut r: Vec<f64> = lp.b().iter().map(|b| -b).collect();
    for (j, xj) in x.iter().enumerate() {
        for (i, a) in lp.a().column_iter(j) {
            r[i] += a * xj;
        }
    }
    let c: f64 = lp.c().iter().zip(x).map(|(c, x)| c * x).sum();
    c + lambda.iter().zip(&r).map(|(l, r)| l * r).sum::<f64>() + r.iter().map(|r| r * r).sum::<f64>() / (2.0 * mu)
}

#[test]
fn subproblem_beats_random_samples() {
    let p = lp(vec![2.0, -1.0, 0.5], &[vec![1.0, 2.0, -1.0], vec![0.0, 1.0, 3.0]], vec![2.0, 3.0]);
    let lambda = [0.4, -0.7];
    let mu = 0.3;
    let x = minimize_subproblem(&p, &lambda, mu, &Point::origin(3), 1e-10, 100_000).unwrap();
    let best = h(&p, &x.0, &lambda, mu);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let s: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..5.0)).collect();
        assert!(best <= h(&p, &s, &lambda, mu) + 1e-9);
    }
}

#[test]
fn subproblem_rejects_bad_tolerance() {
    let p = lp(vec![0.0], &[vec![1.0]], vec![1.0]);
    assert!(matches!(minimize_subproblem(&p, &[0.0], 1.0, &Point::origin(1), 0.0, 10), Err(LabError::Config(_))));
}

#[test]
fn exact_mode_reaches_tiny_optimum() {
    let p = lp(vec![1.0, 1.0], &[vec![1.0, 1.0]], vec![1.0]);
    let t = run_exact_idiot(&p, &LabConfig::new(Mode::ExactIdiot), None).unwrap();
    let last = t.last();
    assert!(last.mu <= 1e-10);
    assert!((last.objective - 1.0).abs() <= 1e-6);
    assert!(last.residual_norm() <= 1e-6);
}

#[test]
fn exact_mode_matches_oracle_on_random_lps() {
    for seed in 0..10 {
        let (inst, f_star) = random_bounded_lp(seed, 3, 6, 5);
        let t = run_exact_idiot(&inst.lp, &LabConfig::new(Mode::ExactIdiot), None).unwrap();
        let last = t.last();
        assert!(last.residual_norm() <= 1e-6, "seed {seed}: residual {}", last.residual_norm());
        assert!(last.objective <= f_star + 1e-4, "seed {seed}: {} vs {f_star}", last.objective);
    }
}

#[test]
fn redundant_zero_row_changes_nothing() {
    let base = lp(vec![1.0, 2.0], &[vec![1.0, 1.0]], vec![1.0]);
    let padded = lp(vec![1.0, 2.0], &[vec![1.0, 1.0], vec![0.0, 0.0]], vec![1.0, 0.0]);
    let cfg = LabConfig::new(Mode::ExactIdiot);
    let a = run_exact_idiot(&base, &cfg, None).unwrap();
    let b = run_exact_idiot(&padded, &cfg, None).unwrap();
    assert_eq!(a.iterates.len(), b.iterates.len());
    for (x, y) in a.iterates.iter().zip(&b.iterates) {
        assert_eq!(x.x, y.x);
        assert_eq!(y.residual[1], 0.0);
    }
}

#[test]
fn proof_inequality_holds_at_multiplier_updates() {
    for seed in 20..26 {
        let (inst, _) = random_bounded_lp(seed, 3, 6, 5);
        let t = run_exact_idiot(&inst.lp, &LabConfig::new(Mode::ExactIdiot), None).unwrap();
        let mut checked = 0;
        for it in t.iterates.iter().filter(|it| it.update == Some(idiot_crash::idiot::Update::Lambda)) {
            let (lhs, rhs) = proof_inequality(&inst.lp, it, &inst.feasible);
            let scale = 1.0 + lhs.abs() + rhs.abs() + it.objective.abs();
            assert!(lhs <= rhs + 1e-8 * scale, "seed {seed} iter {}: {lhs} > {rhs}", it.iter);
            checked += 1;
        }
        assert!(checked > 0);
    }
}

#[test]
fn exact_iterates_beat_feasible_point() {
    let (inst, _) = random_bounded_lp(3, 3, 6, 5);
    let t = run_exact_idiot(&inst.lp, &LabConfig::new(Mode::ExactIdiot), None).unwrap();
    for it in &t.iterates {
        let at_feasible = h(&inst.lp, &inst.feasible, &it.lambda, it.mu);
        assert!(it.h_value <= at_feasible + 1e-8 * (1.0 + at_feasible.abs()));
    }
}

#[test]
fn quadratic_penalty_is_exact_mode_without_multipliers() {
    for seed in 0..5 {
        let (inst, _) = random_bounded_lp(seed, 4, 8, 5);
        let mut cfg = LabConfig::new(Mode::ExactIdiot);
        cfg.lambda_updates = false;
        cfg.max_outer = 20;
        let exact = run_exact_idiot(&inst.lp, &cfg, None).unwrap();
        let quad = run_quadratic_penalty(&inst.lp, &cfg, None).unwrap();
        assert_eq!(exact.iterates, quad.iterates);
        assert_eq!(exact.final_mu.to_bits(), quad.final_mu.to_bits());
    }
}

#[test]
fn feasible_start_keeps_multipliers() {
    let p = lp(vec![0.0, 0.0], &[vec![1.0, 1.0]], vec![2.0]);
    let start = Point(vec![1.0, 1.0]);
    let t = run(&p, &LabConfig::new(Mode::AugmentedLagrangian), Some(start.clone())).unwrap();
    for it in &t.iterates {
        assert_eq!(it.lambda, vec![0.0]);
        assert_eq!(it.x, start);
    }
}

#[test]
fn conventional_multiplier_finds_dual_value() {
    // dual of min x1 s.t. x1 + x2 = 1 is 0; the residual term enters h with
    // +lambda, so the multiplier estimates minus the dual
    let cases = [(vec![1.0, 0.0], 0.0), (vec![1.0, 1.0], -1.0)];
    for (c, expected) in cases {
        let p = lp(c.clone(), &[vec![1.0, 1.0]], vec![1.0]);
        let mut cfg = LabConfig::new(Mode::AugmentedLagrangian);
        cfg.multiplier_update = MultiplierUpdate::Conventional;
        cfg.mu.initial = 0.1;
        cfg.mu.floor = 1e-4;
        let t = run(&p, &cfg, None).unwrap();
        assert!((t.final_lambda[0] - expected).abs() <= 1e-6, "{c:?}: {:?}", t.final_lambda);
        let oracle = solve_by_enumeration(&p).unwrap();
        assert!((t.last().objective - oracle.optimum.unwrap()).abs() <= 1e-6);
    }
}

#[test]
fn idiot_multipliers_vanish_where_al_multipliers_persist() {
    let p = lp(vec![1.0, 1.0], &[vec![1.0, 1.0]], vec![1.0]);
    let idiot = run(&p, &LabConfig::new(Mode::ExactIdiot), None).unwrap();
    let mut cfg = LabConfig::new(Mode::AugmentedLagrangian);
    cfg.mu.floor = 1e-4;
    let al = run(&p, &cfg, None).unwrap();
    let norm = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    assert!(norm(&idiot.final_lambda) <= 1e-9);
    assert!(norm(&al.final_lambda) >= 0.5);
}

#[test]
fn mode_traces_share_header() {
    let p = lp(vec![1.0, 1.0], &[vec![1.0, 1.0]], vec![1.0]);
    let mut headers = Vec::new();
    for mode in Mode::ALL {
        let mut cfg = LabConfig::new(mode);
        cfg.max_outer = 6;
        let t = run(&p, &cfg, None).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().contains(mode.as_str()));
        headers.push(text.lines().next().unwrap().to_string());
    }
    assert!(headers.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn mode_names_round_trip() {
    for mode in Mode::ALL {
        assert_eq!(mode.as_str().parse::<Mode>().unwrap(), mode);
    }
    assert!("simplex".parse::<Mode>().is_err());
}
