#![allow(dead_code)]

use std::path::PathBuf;

use idiot_crash::qap::{parse_qaplib, QapInstance};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn nug(n: usize) -> QapInstance {
    let text = std::fs::read_to_string(fixture(&format!("nug{n:02}.dat"))).unwrap();
    parse_qaplib(&text).unwrap()
}

/// Every permutation of `0..n`, lexicographic.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Direct evaluation of the quadratic assignment objective, independent of
/// the library.
pub fn qap_cost(f: &[Vec<f64>], d: &[Vec<f64>], perm: &[usize]) -> f64 {
    let n = f.len();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += f[i][k] * d[perm[i]][perm[k]];
        }
    }
    s
}

pub fn brute_force_qap(q: &QapInstance) -> f64 {
    permutations(q.n)
        .iter()
        .map(|p| qap_cost(&q.f, &q.d, p))
        .fold(f64::INFINITY, f64::min)
}
