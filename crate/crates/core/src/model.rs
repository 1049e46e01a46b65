//! Standard-form linear programs: `min c^T x  s.t.  A x = b, x >= 0`.

use std::ops::{Deref, DerefMut};

use thiserror::Error;

use crate::sparse::SparseColMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("penalty parameter must be positive, got {0}")]
    NonPositiveMu(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), ModelError> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::Dimension { what, expected, got })
    }
}

/// Row and column labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Names {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
}

/// A primal point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLP {
    c: Vec<f64>,
    a: SparseColMatrix,
    b: Vec<f64>,
    names: Option<Names>,
}

impl StandardFormLP {
    pub fn new(c: Vec<f64>, a: SparseColMatrix, b: Vec<f64>) -> Result<Self, ModelError> {
        check_len("objective length", a.n_cols(), c.len())?;
        check_len("right-hand side length", a.n_rows(), b.len())?;
        if c.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("objective or right-hand side"));
        }
        Ok(Self { c, a, b, names: None })
    }

    /// Dense convenience constructor, mostly for tests and tiny examples.
    pub fn from_dense(c: Vec<f64>, rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self, ModelError> {
        let n = c.len();
        let a = if rows.is_empty() {
            SparseColMatrix::zeros(0, n)
        } else {
            for row in rows {
                check_len("dense row length", n, row.len())?;
            }
            SparseColMatrix::from_dense(rows).map_err(|_| ModelError::NonFinite("matrix"))?
        };
        Self::new(c, a, b)
    }

    pub fn with_names(mut self, names: Names) -> Result<Self, ModelError> {
        check_len("row names", self.n_rows(), names.rows.len())?;
        check_len("column names", self.n_cols(), names.cols.len())?;
        self.names = Some(names);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.a.n_cols()
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &SparseColMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn names(&self) -> Option<&Names> {
        self.names.as_ref()
    }

    /// Drops labels, leaving only the numeric content.
    pub fn without_names(mut self) -> Self {
        self.names = None;
        self
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_len("point length", self.n_cols(), x.len())?;
        Ok(dot(&self.c, x))
    }

    /// `r(x) = A x - b`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        check_len("point length", self.n_cols(), x.len())?;
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        Ok(r)
    }

    /// `h(x) = c^T x + lambda^T r + (1 / 2 mu) r^T r`.
    pub fn idiot_objective(&self, x: &[f64], lambda: &[f64], mu: f64) -> Result<f64, ModelError> {
        check_mu(mu)?;
        check_len("multiplier length", self.n_rows(), lambda.len())?;
        let r = self.residual(x)?;
        Ok(dot(&self.c, x) + dot(lambda, &r) + dot(&r, &r) / (2.0 * mu))
    }

    /// The same function evaluated through its expanded quadratic form
    /// `(1/2mu) x^T A^T A x + (c + A^T lambda - A^T b / mu)^T x - lambda^T b + b^T b / 2mu`.
    pub fn idiot_objective_expanded(
        &self,
        x: &[f64],
        lambda: &[f64],
        mu: f64,
    ) -> Result<f64, ModelError> {
        check_mu(mu)?;
        check_len("multiplier length", self.n_rows(), lambda.len())?;
        check_len("point length", self.n_cols(), x.len())?;
        let ax = self.a.mul_vec(x);
        let at_lambda = self.a.tr_mul_vec(lambda);
        let at_b = self.a.tr_mul_vec(&self.b);
        let linear: f64 = (0..self.n_cols())
            .map(|j| (self.c[j] + at_lambda[j] - at_b[j] / mu) * x[j])
            .sum();
        Ok(dot(&ax, &ax) / (2.0 * mu) + linear - dot(lambda, &self.b) + dot(&self.b, &self.b) / (2.0 * mu))
    }
}

fn check_mu(mu: f64) -> Result<(), ModelError> {
    if mu > 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonPositiveMu(mu))
    }
}

/// Free function form of [`StandardFormLP::residual`].
pub fn compute_residual(lp: &StandardFormLP, x: &Point) -> Result<Vec<f64>, ModelError> {
    lp.residual(x)
}

/// Free function form of [`StandardFormLP::idiot_objective`].
pub fn idiot_objective(
    lp: &StandardFormLP,
    x: &Point,
    lambda: &[f64],
    mu: f64,
) -> Result<f64, ModelError> {
    lp.idiot_objective(x, lambda, mu)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// 2-norm condition number of `A` via a dense SVD.
///
/// Ratio of largest to smallest nonzero singular value. Only meant for
/// desk-scale matrices; refuses anything over `max_entries` dense entries.
pub fn condition_number_dense(a: &SparseColMatrix, max_entries: usize) -> Option<f64> {
    let (m, n) = (a.n_rows(), a.n_cols());
    if m == 0 || n == 0 || m.saturating_mul(n) > max_entries {
        return None;
    }
    let mut dense = nalgebra::DMatrix::<f64>::zeros(m, n);
    for j in 0..n {
        for (i, v) in a.column_iter(j) {
            dense[(i, j)] = v;
        }
    }
    let sv = dense.singular_values();
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    let cutoff = largest * 1e-12 * (m.max(n) as f64);
    let smallest = sv.iter().cloned().filter(|&s| s > cutoff).fold(f64::INFINITY, f64::min);
    (largest > 0.0).then(|| largest / smallest)
}
