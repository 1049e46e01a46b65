//! Seeded random LPs with a known feasible point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::StandardFormLP;
use crate::oracle::{solve_by_enumeration, OracleStatus};

#[derive(Debug, Clone)]
pub struct RandomLp {
    pub lp: StandardFormLP,
    /// Strictly positive point with `A x = b`.
    pub feasible: Vec<f64>,
}

/// Integer `A` and `c` in `[-range, range]`; `b = A x` for a random `x` with
/// entries in `{1, 2, 3}`, so the LP is feasible. Boundedness is not
/// guaranteed.
pub fn random_feasible_lp(rng: &mut impl Rng, m: usize, n: usize, range: i32) -> RandomLp {
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-range..=range) as f64).collect())
        .collect();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-range..=range) as f64).collect();
    let feasible: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=3) as f64).collect();
    let b = rows.iter().map(|r| r.iter().zip(&feasible).map(|(a, x)| a * x).sum()).collect();
    let lp = StandardFormLP::from_dense(c, &rows, b).expect("dimensions consistent by construction");
    RandomLp { lp, feasible }
}

/// Draws from [`random_feasible_lp`] until the oracle reports a finite
/// optimum. Returns the instance and its optimal value.
pub fn random_bounded_lp(seed: u64, m: usize, n: usize, range: i32) -> (RandomLp, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inst = random_feasible_lp(&mut rng, m, n, range);
        if let Ok(res) = solve_by_enumeration(&inst.lp) {
            if res.status == OracleStatus::Optimal {
                let f = res.optimum.expect("optimal result carries a value");
                return (inst, f);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_feasible() {
        let (a, fa) = random_bounded_lp(7, 3, 6, 5);
        let (b, fb) = random_bounded_lp(7, 3, 6, 5);
        assert_eq!(a.lp, b.lp);
        assert_eq!(fa, fb);
        assert!(a.lp.residual(&a.feasible).unwrap().iter().all(|&r| r == 0.0));
        assert!(fa <= a.lp.objective(&a.feasible).unwrap() + 1e-9);
    }
}
