//! Quadratic assignment instances, their Adams–Johnson linearization, and
//! LP dualization.
//!
//! The constraint system is reconstructed so that row and column counts match
//! the published sizes for the Nugent instances; the source does not spell
//! the system out.

use thiserror::Error;

use crate::model::{ModelError, Names, Point, StandardFormLP};
use crate::sparse::SparseColMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QapError {
    #[error("expected {expected} tokens for n = {n}, found {got}")]
    TokenCount { n: usize, expected: usize, got: usize },
    #[error("token {position} (line {line}) is not a number: `{token}`")]
    NonNumeric { position: usize, line: usize, token: String },
    #[error("missing instance size")]
    Empty,
    #[error("linearization needs n >= 2, got {0}")]
    TooSmall(usize),
    #[error("matrices must be {n}x{n}")]
    Shape { n: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QapInstance {
    pub n: usize,
    /// Flow between facilities.
    pub f: Vec<Vec<f64>>,
    /// Distance between locations.
    pub d: Vec<Vec<f64>>,
}

impl QapInstance {
    pub fn new(f: Vec<Vec<f64>>, d: Vec<Vec<f64>>) -> Result<Self, QapError> {
        let n = f.len();
        if d.len() != n || f.iter().chain(&d).any(|r| r.len() != n) {
            return Err(QapError::Shape { n });
        }
        Ok(Self { n, f, d })
    }

    /// `sum_{i,k} F[i][k] D[p(i)][p(k)]` for facility `i` placed at `perm[i]`.
    pub fn cost(&self, perm: &[usize]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for k in 0..self.n {
                total += self.f[i][k] * self.d[perm[i]][perm[k]];
            }
        }
        total
    }
}

/// QAPLIB `.dat` layout: `n`, then the flow and distance matrices row-major.
pub fn parse_qaplib(text: &str) -> Result<QapInstance, QapError> {
    let mut toks = Vec::new();
    for (l, line) in text.lines().enumerate() {
        for t in line.split_whitespace() {
            toks.push((l + 1, t));
        }
    }
    let &(line, first) = toks.first().ok_or(QapError::Empty)?;
    let n: usize = first.parse().map_err(|_| QapError::NonNumeric {
        position: 1,
        line,
        token: first.to_string(),
    })?;
    let expected = 1 + 2 * n * n;
    if toks.len() != expected {
        return Err(QapError::TokenCount { n, expected, got: toks.len() });
    }
    let mut values = Vec::with_capacity(2 * n * n);
    for (pos, &(line, t)) in toks.iter().enumerate().skip(1) {
        let v: f64 = t.parse().map_err(|_| QapError::NonNumeric {
            position: pos + 1,
            line,
            token: t.to_string(),
        })?;
        values.push(v);
    }
    let (fv, dv) = values.split_at(n * n);
    let rows = |v: &[f64]| v.chunks(n.max(1)).map(<[f64]>::to_vec).collect::<Vec<_>>();
    let (f, d) = if n == 0 { (vec![], vec![]) } else { (rows(fv), rows(dv)) };
    QapInstance::new(f, d)
}

/// `(rows, columns)` of the linearization of a size-`n` instance.
pub fn aj_dimensions(n: usize) -> (usize, usize) {
    let rows = 2 * n + 2 * n * n * (n.saturating_sub(1));
    let cols = n * n + n * n * (n.saturating_sub(1)).pow(2) / 2;
    (rows, cols)
}

/// Column and row positions in the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AjLayout {
    pub n: usize,
}

impl AjLayout {
    pub fn x(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// First row of the linking block for `x_kl`: `n - 1` rows indexed by
    /// `i != k`, then `n - 1` rows indexed by `j != l`.
    pub fn block(&self, k: usize, l: usize) -> usize {
        2 * self.n + (k * self.n + l) * 2 * (self.n - 1)
    }

    pub fn i_row(&self, k: usize, l: usize, i: usize) -> usize {
        self.block(k, l) + if i < k { i } else { i - 1 }
    }

    pub fn j_row(&self, k: usize, l: usize, j: usize) -> usize {
        self.block(k, l) + (self.n - 1) + if j < l { j } else { j - 1 }
    }

    /// Unordered pairs `{(i,j),(k,l)}` with `i != k`, `j != l`, listed with
    /// `(i,j) < (k,l)` in lexicographic order of `(i, j, k, l)`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let n = self.n;
        (0..n * n).flat_map(move |p| {
            let (i, j) = (p / n, p % n);
            (p + 1..n * n).filter_map(move |q| {
                let (k, l) = (q / n, q % n);
                (i != k && j != l).then_some((i, j, k, l))
            })
        })
    }
}

/// Adams–Johnson linearization with symmetric pair variables.
///
/// Columns: `x_ij` at `i n + j`, then one `y` per unordered pair (see
/// [`AjLayout::pairs`]). Rows: `sum_i x_ij = 1` for each `j`, then
/// `sum_j x_ij = 1` for each `i`, then for each `(k,l)` the rows
/// `sum_{j != l} y_ijkl = x_kl` (each `i != k`) followed by
/// `sum_{i != k} y_ijkl = x_kl` (each `j != l`).
///
/// The pair cost is `F_ik D_jl + F_ki D_lj`; `x_ij` carries `F_ii D_jj`.
pub fn aj_linearize(q: &QapInstance) -> Result<StandardFormLP, QapError> {
    let n = q.n;
    if n < 2 {
        return Err(QapError::TooSmall(n));
    }
    let lay = AjLayout { n };
    let (n_rows, n_cols) = aj_dimensions(n);
    let mut columns: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n_cols);
    let mut costs = Vec::with_capacity(n_cols);
    let mut col_names = Vec::with_capacity(n_cols);
    for i in 0..n {
        for j in 0..n {
            let mut col = vec![(j, 1.0), (n + i, 1.0)];
            for i2 in (0..n).filter(|&v| v != i) {
                col.push((lay.i_row(i, j, i2), -1.0));
            }
            for j2 in (0..n).filter(|&v| v != j) {
                col.push((lay.j_row(i, j, j2), -1.0));
            }
            columns.push(col);
            costs.push(q.f[i][i] * q.d[j][j]);
            col_names.push(format!("X{}_{}", i + 1, j + 1));
        }
    }
    for (i, j, k, l) in lay.pairs() {
        columns.push(vec![
            (lay.i_row(k, l, i), 1.0),
            (lay.j_row(k, l, j), 1.0),
            (lay.i_row(i, j, k), 1.0),
            (lay.j_row(i, j, l), 1.0),
        ]);
        costs.push(q.f[i][k] * q.d[j][l] + q.f[k][i] * q.d[l][j]);
        col_names.push(format!("Y{}_{}_{}_{}", i + 1, j + 1, k + 1, l + 1));
    }
    debug_assert_eq!(columns.len(), n_cols);

    let mut b = vec![0.0; n_rows];
    b[..2 * n].fill(1.0);
    let mut row_names: Vec<String> = (0..n).map(|j| format!("COL{}", j + 1)).collect();
    row_names.extend((0..n).map(|i| format!("ROW{}", i + 1)));
    for k in 0..n {
        for l in 0..n {
            row_names.extend((0..n).filter(|&i| i != k).map(|i| format!("LI{}_{}_{}", k + 1, l + 1, i + 1)));
            row_names.extend((0..n).filter(|&j| j != l).map(|j| format!("LJ{}_{}_{}", k + 1, l + 1, j + 1)));
        }
    }
    let a = SparseColMatrix::from_columns(n_rows, columns).expect("rows within range by construction");
    Ok(StandardFormLP::new(costs, a, b)?.with_names(Names { rows: row_names, cols: col_names })?)
}

/// The linearization point of a permutation: `x_{i,perm[i]} = 1` and each pair
/// variable equal to the product of its two `x` values.
pub fn permutation_point(n: usize, perm: &[usize]) -> Point {
    let lay = AjLayout { n };
    let mut x = vec![0.0; aj_dimensions(n).1];
    for (i, &p) in perm.iter().enumerate() {
        x[lay.x(i, p)] = 1.0;
    }
    for (idx, (i, j, k, l)) in lay.pairs().enumerate() {
        if perm[i] == j && perm[k] == l {
            x[n * n + idx] = 1.0;
        }
    }
    Point(x)
}

/// Recovers dual values and objective from a point of [`dualize`]'s output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualMap {
    /// Rows of the primal (dual variables).
    pub m: usize,
    /// Columns of the primal (dual constraints).
    pub n: usize,
}

impl DualMap {
    /// `y = y+ - y-`.
    pub fn dual_values(&self, z: &[f64]) -> Vec<f64> {
        (0..self.m).map(|i| z[i] - z[self.m + i]).collect()
    }

    /// `b^T y` given the standard-form objective, which minimises `-b^T y`.
    pub fn dual_objective(&self, standard_objective: f64) -> f64 {
        -standard_objective
    }
}

/// Writes `max b^T y, A^T y <= c, y free` as
/// `min -b^T y+ + b^T y- , A^T y+ - A^T y- + s = c, (y+, y-, s) >= 0`.
/// The result has `n` rows and `2m + n` columns; at optimality its objective
/// is the negated primal optimum.
pub fn dualize(lp: &StandardFormLP) -> Result<(StandardFormLP, DualMap), QapError> {
    let (m, n) = (lp.n_rows(), lp.n_cols());
    let at = lp.a().transpose();
    let mut columns = Vec::with_capacity(2 * m + n);
    let mut costs = Vec::with_capacity(2 * m + n);
    for i in 0..m {
        columns.push(at.column_iter(i).collect::<Vec<_>>());
        costs.push(-lp.b()[i]);
    }
    for i in 0..m {
        columns.push(at.column_iter(i).map(|(r, v)| (r, -v)).collect());
        costs.push(lp.b()[i]);
    }
    for j in 0..n {
        columns.push(vec![(j, 1.0)]);
        costs.push(0.0);
    }
    let a = SparseColMatrix::from_columns(n, columns).expect("rows within range by construction");
    let mut dual = StandardFormLP::new(costs, a, lp.c().to_vec())?;
    if let Some(names) = lp.names() {
        let mut cols: Vec<String> = names.rows.iter().map(|r| format!("{r}+")).collect();
        cols.extend(names.rows.iter().map(|r| format!("{r}-")));
        cols.extend(names.cols.iter().map(|c| format!("{c}_s")));
        dual = dual.with_names(Names { rows: names.cols.clone(), cols })?;
    }
    Ok((dual, DualMap { m, n }))
}
