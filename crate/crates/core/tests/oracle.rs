use idiot_crash::instances::{random_bounded_lp, random_feasible_lp};
use idiot_crash::oracle::{solve_by_enumeration, OracleStatus};
use idiot_crash::qap::dualize;
use idiot_crash::{SparseColMatrix, StandardFormLP};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn permute_columns(lp: &StandardFormLP, perm: &[usize]) -> StandardFormLP {
    let cols = perm.iter().map(|&j| lp.a().column_iter(j).collect()).collect();
    let a = SparseColMatrix::from_columns(lp.n_rows(), cols).unwrap();
    StandardFormLP::new(perm.iter().map(|&j| lp.c()[j]).collect(), a, lp.b().to_vec()).unwrap()
}

fn scale_rows(lp: &StandardFormLP, s: &[f64]) -> StandardFormLP {
    let cols = (0..lp.n_cols())
        .map(|j| lp.a().column_iter(j).map(|(i, v)| (i, v * s[i])).collect())
        .collect();
    let a = SparseColMatrix::from_columns(lp.n_rows(), cols).unwrap();
    let b = lp.b().iter().zip(s).map(|(b, s)| b * s).collect();
    StandardFormLP::new(lp.c().to_vec(), a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn optimum_invariant_under_permutation_and_scaling(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(m + 1..=6);
        let inst = random_feasible_lp(&mut rng, m, n, 5);
        let base = solve_by_enumeration(&inst.lp).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let scales: Vec<f64> = (0..m)
            .map(|_| {
                let s = rng.gen_range(0.1..10.0);
                if rng.gen_bool(0.5) { -s } else { s }
            })
            .collect();
        for other in [permute_columns(&inst.lp, &perm), scale_rows(&inst.lp, &scales)] {
            let res = solve_by_enumeration(&other).unwrap();
            prop_assert_eq!(res.status, base.status);
            if let (Some(a), Some(b)) = (res.optimum, base.optimum) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }
}

#[test]
fn optimal_vertex_feasible_and_no_better_basis() {
    for seed in 0..20 {
        let (inst, f) = random_bounded_lp(seed, 3, 6, 5);
        let res = solve_by_enumeration(&inst.lp).unwrap();
        let x = res.vertex.unwrap();
        assert!(x.is_nonnegative());
        let r = inst.lp.residual(&x).unwrap();
        assert!(r.iter().all(|v| v.abs() <= 1e-9 * (1.0 + inst.lp.b().iter().fold(0.0f64, |m, b| m.max(b.abs())))));
        assert!(f <= inst.lp.objective(&inst.feasible).unwrap() + 1e-9);
    }
}

#[test]
fn strong_duality_on_small_lps() {
    for seed in 0..5 {
        let (inst, f) = random_bounded_lp(100 + seed, 3, 5, 5);
        let (dual, map) = dualize(&inst.lp).unwrap();
        assert_eq!((dual.n_rows(), dual.n_cols()), (5, 2 * 3 + 5));
        let res = solve_by_enumeration(&dual).unwrap();
        assert_eq!(res.status, OracleStatus::Optimal);
        let g = map.dual_objective(res.optimum.unwrap());
        assert!((g - f).abs() <= 1e-8 * (1.0 + f.abs()), "seed {seed}: {g} vs {f}");
    }
}

#[test]
fn one_dimensional_duality() {
    let lp = StandardFormLP::from_dense(vec![1.0], &[vec![1.0]], vec![1.0]).unwrap();
    let (dual, map) = dualize(&lp).unwrap();
    let res = solve_by_enumeration(&dual).unwrap();
    assert_eq!(map.dual_objective(res.optimum.unwrap()), 1.0);
}
