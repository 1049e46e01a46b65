//! Ground truth for tiny LPs by enumerating every basis.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{dot, Point, StandardFormLP};

/// Largest constraint rank the oracle accepts.
pub const MAX_RANK: usize = 8;
/// Largest number of column subsets the oracle accepts.
pub const MAX_SUBSETS: u128 = 100_000;
/// Absolute tolerance on `x >= 0` for a basic solution.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub status: OracleStatus,
    pub optimum: Option<f64>,
    pub vertex: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle refuses rank {rank} with {n_cols} columns ({subsets} subsets); limits are rank {MAX_RANK}, {MAX_SUBSETS} subsets")]
    TooLarge { rank: usize, n_cols: usize, subsets: u128 },
}

/// `n choose k`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1; divide by the gcd first to delay overflow
        let num = (n - i) as u128;
        let den = i as u128 + 1;
        let g = gcd(acc, den);
        let (a, d) = (acc / g, den / g);
        acc = match a.checked_mul(num / d) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    acc
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Row-echelon reduction of `[A | b]`. Returns the independent rows, or
/// `None` when some row reduces to `0 = nonzero`.
fn independent_rows(a: &[Vec<f64>], b: &[f64], n: usize) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut rows: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut v = r.clone();
            v.push(bi);
            v
        })
        .collect();
    let scale = rows.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;
    let mut rank = 0;
    for col in 0..n {
        if rank == rows.len() {
            break;
        }
        let (p, best) = (rank..rows.len())
            .map(|i| (i, rows[i][col].abs()))
            .fold((rank, 0.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best <= tol {
            continue;
        }
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            let f = rows[i][col] / rows[rank][col];
            if f != 0.0 {
                for k in col..=n {
                    rows[i][k] -= f * rows[rank][k];
                }
                rows[i][col] = 0.0;
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[n].abs() > tol) {
        return None;
    }
    rows.truncate(rank);
    let rhs = rows.iter_mut().map(|r| r.pop().unwrap()).collect();
    Some((rows, rhs))
}

/// Lexicographic successor of a `k`-subset of `0..n`.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for pos in (0..k).rev() {
        if idx[pos] < n - k + pos {
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Best basic feasible solution of `min c^T x, A x = b, x >= 0` where `A`
/// has full row rank. `None` if no basis is feasible.
fn best_basis(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (m, n) = (a.len(), c.len());
    if m == 0 {
        return Some((0.0, vec![0.0; n]));
    }
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        let basis = DMatrix::from_fn(m, m, |i, k| a[i][idx[k]]);
        let lu = basis.lu();
        let u = lu.u();
        let pivot_min = (0..m).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if pivot_min > 1e-11 * scale {
            if let Some(xb) = lu.solve(&DVector::from_column_slice(b)) {
                if xb.iter().all(|&v| v >= -FEASIBILITY_TOL) {
                    let mut x = vec![0.0; n];
                    for (k, &j) in idx.iter().enumerate() {
                        x[j] = xb[k].max(0.0);
                    }
                    let f = dot(c, &x);
                    if best.as_ref().map_or(true, |(fb, _)| f < *fb - FEASIBILITY_TOL) {
                        best = Some((f, x));
                    }
                }
            }
        }
        if !next_combination(&mut idx, n) {
            break;
        }
    }
    best
}

fn dense(lp: &StandardFormLP) -> Vec<Vec<f64>> {
    lp.a().to_dense()
}

/// Solves a tiny LP exactly (up to rounding) by trying every basis.
///
/// Redundant rows are removed first, so the size limits apply to the rank of
/// `A` rather than its row count. Unboundedness is decided by minimising
/// `c^T d` over the recession directions `{A d = 0, sum d = 1, d >= 0}`.
pub fn solve_by_enumeration(lp: &StandardFormLP) -> Result<OracleResult, OracleError> {
    let n = lp.n_cols();
    let infeasible = OracleResult { status: OracleStatus::Infeasible, optimum: None, vertex: None };
    let Some((rows, rhs)) = independent_rows(&dense(lp), lp.b(), n) else {
        return Ok(infeasible);
    };
    let rank = rows.len();
    let subsets = binomial(n, rank);
    if rank > MAX_RANK || subsets > MAX_SUBSETS {
        return Err(OracleError::TooLarge { rank, n_cols: n, subsets });
    }
    let Some((optimum, x)) = best_basis(&rows, &rhs, lp.c()) else {
        return Ok(infeasible);
    };
    if has_descent_ray(&rows, lp.c()) {
        return Ok(OracleResult { status: OracleStatus::Unbounded, optimum: None, vertex: None });
    }
    Ok(OracleResult {
        status: OracleStatus::Optimal,
        optimum: Some(optimum),
        vertex: Some(Point(x)),
    })
}

fn has_descent_ray(rows: &[Vec<f64>], c: &[f64]) -> bool {
    let n = c.len();
    if n == 0 {
        return false;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    a.push(vec![1.0; n]);
    let mut b = vec![0.0; rows.len()];
    b.push(1.0);
    let Some((a, b)) = independent_rows(&a, &b, n) else {
        return false;
    };
    let cscale = c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    matches!(best_basis(&a, &b, c), Some((f, _)) if f < -FEASIBILITY_TOL * cscale)
}
