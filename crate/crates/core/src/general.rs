//! General-form LPs as read from MPS files, and their reduction to standard form.

use thiserror::Error;

use crate::model::{ModelError, Names, StandardFormLP};
use crate::sparse::SparseColMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sense {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `a^T x <= rhs`
    Le,
    /// `a^T x >= rhs`
    Ge,
    /// `a^T x = rhs`
    Eq,
    /// Non-objective `N` row; carries no constraint.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub kind: RowKind,
    pub rhs: f64,
    pub range: Option<f64>,
}

impl Row {
    /// Lower and upper limits on the row activity after applying RANGES.
    pub fn limits(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match (self.kind, self.range) {
            (RowKind::Free, _) => (-inf, inf),
            (RowKind::Le, None) => (-inf, self.rhs),
            (RowKind::Ge, None) => (self.rhs, inf),
            (RowKind::Eq, None) => (self.rhs, self.rhs),
            (RowKind::Le, Some(r)) => (self.rhs - r.abs(), self.rhs),
            (RowKind::Ge, Some(r)) => (self.rhs, self.rhs + r.abs()),
            (RowKind::Eq, Some(r)) if r >= 0.0 => (self.rhs, self.rhs + r),
            (RowKind::Eq, Some(r)) => (self.rhs + r, self.rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
    /// `(row index, coefficient)`; row indices refer to [`GeneralLP::rows`].
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralLP {
    pub name: String,
    pub sense: Sense,
    pub objective_name: String,
    pub rows: Vec<Row>,
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneralError {
    #[error("column `{name}` has lower bound {lower} above upper bound {upper}")]
    InconsistentBounds { name: String, lower: f64, upper: f64 },
    #[error("column `{column}` references row {row} of {n_rows}")]
    UnknownRow { column: String, row: usize, n_rows: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl GeneralLP {
    pub fn validate(&self) -> Result<(), GeneralError> {
        for col in &self.columns {
            if col.lower > col.upper {
                return Err(GeneralError::InconsistentBounds {
                    name: col.name.clone(),
                    lower: col.lower,
                    upper: col.upper,
                });
            }
            if let Some(&(row, _)) = col.entries.iter().find(|(r, _)| *r >= self.rows.len()) {
                return Err(GeneralError::UnknownRow {
                    column: col.name.clone(),
                    row,
                    n_rows: self.rows.len(),
                });
            }
        }
        Ok(())
    }

    /// Views a standard-form LP as a general one: all rows equalities, all
    /// columns in `[0, inf)`.
    pub fn from_standard(lp: &StandardFormLP) -> Self {
        let names = lp.names().cloned().unwrap_or_else(|| default_names(lp.n_rows(), lp.n_cols()));
        let rows = (0..lp.n_rows())
            .map(|i| Row {
                name: names.rows[i].clone(),
                kind: RowKind::Eq,
                rhs: lp.b()[i],
                range: None,
            })
            .collect();
        let columns = (0..lp.n_cols())
            .map(|j| Column {
                name: names.cols[j].clone(),
                cost: lp.c()[j],
                lower: 0.0,
                upper: f64::INFINITY,
                entries: lp.a().column_iter(j).collect(),
            })
            .collect();
        GeneralLP {
            name: String::new(),
            sense: Sense::Minimize,
            objective_name: "COST".into(),
            rows,
            columns,
        }
    }
}

/// `R0001...` and `C0001...`.
pub fn default_names(n_rows: usize, n_cols: usize) -> Names {
    Names {
        rows: (1..=n_rows).map(|i| format!("R{i:04}")).collect(),
        cols: (1..=n_cols).map(|j| format!("C{j:04}")).collect(),
    }
}

/// How one original column is represented in the standard form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColumnMap {
    /// `x = lower + x'[col]`.
    Shifted { col: usize, lower: f64 },
    /// `x = upper - x'[col]` (no finite lower bound).
    Mirrored { col: usize, upper: f64 },
    /// `x = x'[pos] - x'[neg]`.
    Split { pos: usize, neg: usize },
}

/// Recovers original variables and objective from a standard-form point.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    pub columns: Vec<ColumnMap>,
    pub sense: Sense,
    /// Constant added to the standard-form objective by the bound shifts
    /// (in minimisation terms).
    pub objective_offset: f64,
}

impl VariableMap {
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|m| match *m {
                ColumnMap::Shifted { col, lower } => lower + x[col],
                ColumnMap::Mirrored { col, upper } => upper - x[col],
                ColumnMap::Split { pos, neg } => x[pos] - x[neg],
            })
            .collect()
    }

    /// Original objective value given the standard-form objective value.
    pub fn original_objective(&self, standard_objective: f64) -> f64 {
        let min_value = standard_objective + self.objective_offset;
        match self.sense {
            Sense::Minimize => min_value,
            Sense::Maximize => -min_value,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.objective_offset == 0.0
            && self.sense == Sense::Minimize
            && self
                .columns
                .iter()
                .enumerate()
                .all(|(j, m)| *m == ColumnMap::Shifted { col: j, lower: 0.0 })
    }
}

/// Reduces a general LP to `min c^T x, A x = b, x >= 0`.
///
/// Lower-bounded columns are shifted to start at zero, columns with only an
/// upper bound are mirrored, and free columns are split. Finite upper bounds
/// on shifted columns become extra rows `x' + s = u - l`. Inequality rows
/// gain slacks; ranged rows gain a slack plus a bounding row. Free rows are
/// dropped. Original columns keep their positions; new columns follow.
pub fn to_standard_form(g: &GeneralLP) -> Result<(StandardFormLP, VariableMap), GeneralError> {
    g.validate()?;
    let sign = match g.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    // row activities, before slacks
    let kept_rows: Vec<usize> = (0..g.rows.len()).filter(|&i| g.rows[i].kind != RowKind::Free).collect();
    let mut row_pos = vec![usize::MAX; g.rows.len()];
    for (k, &i) in kept_rows.iter().enumerate() {
        row_pos[i] = k;
    }

    let mut columns: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut costs = Vec::new();
    let mut col_names = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut row_names = Vec::new();
    let mut maps = Vec::with_capacity(g.columns.len());
    let mut offset = 0.0;
    let mut deferred_upper: Vec<(usize, f64, String)> = Vec::new();

    for &i in &kept_rows {
        row_names.push(g.rows[i].name.clone());
        rhs.push(0.0);
    }
    let mut shift = vec![0.0; kept_rows.len()];

    for col in &g.columns {
        let entries: Vec<(usize, f64)> = col
            .entries
            .iter()
            .filter(|(r, _)| row_pos[*r] != usize::MAX)
            .map(|&(r, v)| (row_pos[r], v))
            .collect();
        let cost = sign * col.cost;
        let j = columns.len();
        if col.lower.is_finite() {
            for &(r, v) in &entries {
                shift[r] += v * col.lower;
            }
            offset += cost * col.lower;
            maps.push(ColumnMap::Shifted { col: j, lower: col.lower });
            if col.upper.is_finite() {
                deferred_upper.push((j, col.upper - col.lower, col.name.clone()));
            }
            columns.push(entries);
            costs.push(cost);
            col_names.push(col.name.clone());
        } else if col.upper.is_finite() {
            for &(r, v) in &entries {
                shift[r] += v * col.upper;
            }
            offset += cost * col.upper;
            maps.push(ColumnMap::Mirrored { col: j, upper: col.upper });
            columns.push(entries.iter().map(|&(r, v)| (r, -v)).collect());
            costs.push(-cost);
            col_names.push(col.name.clone());
        } else {
            maps.push(ColumnMap::Split { pos: j, neg: j + 1 });
            columns.push(entries.clone());
            costs.push(cost);
            col_names.push(format!("{}+", col.name));
            columns.push(entries.iter().map(|&(r, v)| (r, -v)).collect());
            costs.push(-cost);
            col_names.push(format!("{}-", col.name));
        }
    }

    // Row limits become equalities with slacks.
    for (k, &i) in kept_rows.iter().enumerate() {
        let row = &g.rows[i];
        let (lo, hi) = row.limits();
        let (lo, hi) = (lo - shift[k], hi - shift[k]);
        match row.kind {
            RowKind::Eq if row.range.is_none() => rhs[k] = hi,
            RowKind::Le if row.range.is_none() => {
                rhs[k] = hi;
                columns.push(vec![(k, 1.0)]);
                costs.push(0.0);
                col_names.push(format!("{}_s", row.name));
            }
            RowKind::Ge if row.range.is_none() => {
                rhs[k] = lo;
                columns.push(vec![(k, -1.0)]);
                costs.push(0.0);
                col_names.push(format!("{}_s", row.name));
            }
            _ if lo == hi => rhs[k] = lo,
            _ => {
                // a^T x - s = lo, s + t = hi - lo
                rhs[k] = lo;
                let extra = rhs.len();
                rhs.push(hi - lo);
                row_names.push(format!("{}_rng", row.name));
                columns.push(vec![(k, -1.0), (extra, 1.0)]);
                costs.push(0.0);
                col_names.push(format!("{}_s", row.name));
                columns.push(vec![(extra, 1.0)]);
                costs.push(0.0);
                col_names.push(format!("{}_t", row.name));
            }
        }
    }

    for (j, width, name) in deferred_upper {
        let r = rhs.len();
        rhs.push(width);
        row_names.push(format!("{name}_ub"));
        columns[j].push((r, 1.0));
        columns.push(vec![(r, 1.0)]);
        costs.push(0.0);
        col_names.push(format!("{name}_us"));
    }

    let a = SparseColMatrix::from_columns(rhs.len(), columns).expect("row indices constructed in range");
    let lp = StandardFormLP::new(costs, a, rhs)?.with_names(Names { rows: row_names, cols: col_names })?;
    Ok((
        lp,
        VariableMap {
            columns: maps,
            sense: g.sense,
            objective_offset: offset,
        },
    ))
}
