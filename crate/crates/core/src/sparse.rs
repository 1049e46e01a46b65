//! Compressed sparse column storage.
//!
//! The penalty solver touches one column per coordinate update, so the matrix
//! is stored column-major only. Squared column norms are computed once at
//! construction and reused by every coordinate step.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SparseError {
    #[error("row index {row} out of range for {n_rows} rows (column {col})")]
    RowOutOfRange { col: usize, row: usize, n_rows: usize },
    #[error("column {col}: row indices not strictly increasing at position {pos}")]
    NotCanonical { col: usize, pos: usize },
    #[error("column {col}: explicit zero stored at row {row}")]
    ExplicitZero { col: usize, row: usize },
    #[error("column {col}: non-finite coefficient at row {row}")]
    NonFinite { col: usize, row: usize },
    #[error("column pointer array malformed: {0}")]
    BadPointers(String),
    #[error("triplet column index {col} out of range for {n_cols} columns")]
    ColOutOfRange { col: usize, n_cols: usize },
}

/// An `n_rows x n_cols` matrix in compressed column form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColMatrix {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    col_sq_norms: Vec<f64>,
}

impl SparseColMatrix {
    /// Builds a matrix from raw CSC arrays, validating canonical form.
    pub fn from_csc(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        if col_ptr.len() != n_cols + 1 {
            return Err(SparseError::BadPointers(format!(
                "expected {} entries, got {}",
                n_cols + 1,
                col_ptr.len()
            )));
        }
        if col_ptr[0] != 0 || col_ptr[n_cols] != row_idx.len() || row_idx.len() != values.len() {
            return Err(SparseError::BadPointers(
                "pointer bounds disagree with the stored nonzero count".into(),
            ));
        }
        for col in 0..n_cols {
            let (start, end) = (col_ptr[col], col_ptr[col + 1]);
            if start > end {
                return Err(SparseError::BadPointers(format!(
                    "column {col} has decreasing pointers"
                )));
            }
            for pos in start..end {
                let row = row_idx[pos];
                if row >= n_rows {
                    return Err(SparseError::RowOutOfRange { col, row, n_rows });
                }
                if pos > start && row_idx[pos - 1] >= row {
                    return Err(SparseError::NotCanonical { col, pos: pos - start });
                }
                if values[pos] == 0.0 {
                    return Err(SparseError::ExplicitZero { col, row });
                }
                if !values[pos].is_finite() {
                    return Err(SparseError::NonFinite { col, row });
                }
            }
        }
        let col_sq_norms = (0..n_cols)
            .map(|j| values[col_ptr[j]..col_ptr[j + 1]].iter().map(|v| v * v).sum())
            .collect();
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
            col_sq_norms,
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate entries are summed and entries that end up exactly zero are
    /// dropped, so the result is always canonical.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_cols];
        for &(row, col, value) in triplets {
            if col >= n_cols {
                return Err(SparseError::ColOutOfRange { col, n_cols });
            }
            if row >= n_rows {
                return Err(SparseError::RowOutOfRange { col, row, n_rows });
            }
            columns[col].push((row, value));
        }
        Self::from_columns(n_rows, columns)
    }

    /// Builds a matrix from per-column entry lists in any order.
    pub fn from_columns(
        n_rows: usize,
        columns: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, SparseError> {
        let n_cols = columns.len();
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for (col, mut entries) in columns.into_iter().enumerate() {
            entries.sort_by_key(|&(row, _)| row);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for (row, value) in entries {
                if row >= n_rows {
                    return Err(SparseError::RowOutOfRange { col, row, n_rows });
                }
                match merged.last_mut() {
                    Some(last) if last.0 == row => last.1 += value,
                    _ => merged.push((row, value)),
                }
            }
            for (row, value) in merged {
                if value != 0.0 {
                    row_idx.push(row);
                    values.push(value);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self::from_csc(n_rows, n_cols, col_ptr, row_idx, values)
    }

    /// Builds a matrix from dense rows, skipping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, SparseError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::new(); n_cols];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged dense matrix");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    columns[j].push((i, v));
                }
            }
        }
        Self::from_columns(n_rows, columns)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_csc(n_rows, n_cols, vec![0; n_cols + 1], Vec::new(), Vec::new())
            .expect("empty matrix is canonical")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.values[range])
    }

    pub fn column_iter(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (rows, vals) = self.column(j);
        rows.iter().copied().zip(vals.iter().copied())
    }

    /// Cached `||a_j||^2`.
    #[inline]
    pub fn col_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }

    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }

    /// `a_j^T v`.
    #[inline]
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        let (rows, vals) = self.column(j);
        rows.iter().zip(vals).map(|(&i, &a)| a * v[i]).sum()
    }

    /// `v += alpha * a_j`.
    #[inline]
    pub fn col_axpy(&self, j: usize, alpha: f64, v: &mut [f64]) {
        let (rows, vals) = self.column(j);
        for (&i, &a) in rows.iter().zip(vals) {
            v[i] += alpha * a;
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                self.col_axpy(j, xj, &mut y);
            }
        }
        y
    }

    /// `y = A^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_rows);
        (0..self.n_cols).map(|j| self.col_dot(j, v)).collect()
    }

    /// Returns `A^T` in compressed column form.
    pub fn transpose(&self) -> Self {
        let mut columns = vec![Vec::new(); self.n_rows];
        for j in 0..self.n_cols {
            for (i, v) in self.column_iter(j) {
                columns[i].push((j, v));
            }
        }
        Self::from_columns(self.n_cols, columns).expect("transpose of a canonical matrix")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n_cols]; self.n_rows];
        for j in 0..self.n_cols {
            for (i, v) in self.column_iter(j) {
                dense[i][j] = v;
            }
        }
        dense
    }

    /// Number of stored entries in each row.
    pub fn row_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_rows];
        for &i in &self.row_idx {
            counts[i] += 1;
        }
        counts
    }

    /// Checks the canonical-form and cache invariants.
    pub fn validate(&self) -> Result<(), SparseError> {
        let rebuilt = Self::from_csc(
            self.n_rows,
            self.n_cols,
            self.col_ptr.clone(),
            self.row_idx.clone(),
            self.values.clone(),
        )?;
        for (j, (&cached, &fresh)) in self.col_sq_norms.iter().zip(&rebuilt.col_sq_norms).enumerate() {
            if (cached - fresh).abs() > 1e-12 * fresh.abs().max(f64::MIN_POSITIVE) {
                return Err(SparseError::BadPointers(format!(
                    "column {j} norm cache is stale"
                )));
            }
        }
        Ok(())
    }
}
