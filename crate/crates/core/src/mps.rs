//! Free-format MPS reading and writing.

use std::collections::HashMap;
use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::general::{default_names, to_standard_form, Column, GeneralError, GeneralLP, Row, RowKind, Sense, VariableMap};
use crate::model::{Names, StandardFormLP};
use crate::report::fmt_real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("duplicate row `{0}`")]
    DuplicateRow(String),
    #[error("unknown row `{0}`")]
    UnknownRow(String),
    #[error("bound on undeclared column `{0}`")]
    UndeclaredColumn(String),
    #[error("unknown row type `{0}`")]
    UnknownRowType(String),
    #[error("unknown bound type `{0}`")]
    UnknownBoundType(String),
    #[error("bad number `{0}`")]
    BadNumber(String),
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("input is not valid UTF-8")]
    Encoding,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] GeneralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

fn number(tok: &str, line: usize) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        // accept the common spellings of infinity in bounds
        Ok(v) if v.is_infinite() => Ok(v),
        _ => Err(ParseError { line, kind: ParseErrorKind::BadNumber(tok.to_string()) }),
    }
}

struct Parser {
    lp: GeneralLP,
    row_index: HashMap<String, usize>,
    col_index: HashMap<String, usize>,
    objective_seen: bool,
}

impl Parser {
    fn err(line: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line, kind }
    }

    fn row(&mut self, toks: &[&str], line: usize) -> Result<(), ParseError> {
        let [kind, name] = toks else {
            return Err(Self::err(line, ParseErrorKind::Malformed("ROWS entry needs a type and a name".into())));
        };
        let kind = match kind.to_ascii_uppercase().as_str() {
            "N" => RowKind::Free,
            "E" => RowKind::Eq,
            "L" => RowKind::Le,
            "G" => RowKind::Ge,
            other => return Err(Self::err(line, ParseErrorKind::UnknownRowType(other.to_string()))),
        };
        if self.row_index.contains_key(*name) || self.lp.objective_name == *name && self.objective_seen {
            return Err(Self::err(line, ParseErrorKind::DuplicateRow(name.to_string())));
        }
        if kind == RowKind::Free && !self.objective_seen {
            self.objective_seen = true;
            self.lp.objective_name = name.to_string();
            return Ok(());
        }
        self.row_index.insert(name.to_string(), self.lp.rows.len());
        self.lp.rows.push(Row { name: name.to_string(), kind, rhs: 0.0, range: None });
        Ok(())
    }

    /// `Some(i)` for a constraint row, `None` for the objective.
    fn lookup_row(&self, name: &str, line: usize) -> Result<Option<usize>, ParseError> {
        if self.objective_seen && name == self.lp.objective_name {
            return Ok(None);
        }
        self.row_index
            .get(name)
            .map(|&i| Some(i))
            .ok_or_else(|| Self::err(line, ParseErrorKind::UnknownRow(name.to_string())))
    }

    fn column(&mut self, toks: &[&str], line: usize) -> Result<(), ParseError> {
        if toks.iter().any(|t| t.eq_ignore_ascii_case("'MARKER'")) {
            log::warn!("line {line}: integrality marker ignored");
            return Ok(());
        }
        if toks.len() != 3 && toks.len() != 5 {
            return Err(Self::err(line, ParseErrorKind::Malformed("COLUMNS entry needs a column and one or two row/value pairs".into())));
        }
        let name = toks[0];
        let j = match self.col_index.get(name) {
            Some(&j) => j,
            None => {
                let j = self.lp.columns.len();
                self.col_index.insert(name.to_string(), j);
                self.lp.columns.push(Column {
                    name: name.to_string(),
                    cost: 0.0,
                    lower: 0.0,
                    upper: f64::INFINITY,
                    entries: Vec::new(),
                });
                j
            }
        };
        for pair in toks[1..].chunks(2) {
            let v = number(pair[1], line)?;
            match self.lookup_row(pair[0], line)? {
                None => self.lp.columns[j].cost += v,
                Some(i) => {
                    if v != 0.0 {
                        self.lp.columns[j].entries.push((i, v));
                    }
                }
            }
        }
        Ok(())
    }

    /// RHS and RANGES lines: optional set name, then one or two pairs.
    fn row_values(&mut self, toks: &[&str], line: usize, ranges: bool) -> Result<(), ParseError> {
        let pairs = match toks.len() {
            2 | 4 => toks,
            3 | 5 => &toks[1..],
            _ => {
                return Err(Self::err(line, ParseErrorKind::Malformed("expected [set] row value [row value]".into())));
            }
        };
        for pair in pairs.chunks(2) {
            let v = number(pair[1], line)?;
            match self.lookup_row(pair[0], line)? {
                None if ranges => {
                    return Err(Self::err(line, ParseErrorKind::Malformed("range on the objective row".into())));
                }
                None => log::warn!("line {line}: objective constant in RHS ignored"),
                Some(i) if ranges => self.lp.rows[i].range = Some(v),
                Some(i) => self.lp.rows[i].rhs = v,
            }
        }
        Ok(())
    }

    fn bound(&mut self, toks: &[&str], line: usize) -> Result<(), ParseError> {
        let Some(kind) = toks.first().map(|t| t.to_ascii_uppercase()) else {
            return Ok(());
        };
        let needs_value = !matches!(kind.as_str(), "FR" | "MI" | "PL" | "BV");
        let rest = &toks[1..];
        let (col, value) = match (needs_value, rest.len()) {
            (true, 3) => (rest[1], Some(rest[2])),
            (true, 2) => (rest[0], Some(rest[1])),
            // some writers append an ignored value to FR/MI/PL/BV
            (false, 2) | (false, 3) => (rest[1], None),
            (false, 1) => (rest[0], None),
            _ => return Err(Self::err(line, ParseErrorKind::Malformed(format!("bad {kind} bound entry")))),
        };
        let j = *self
            .col_index
            .get(col)
            .ok_or_else(|| Self::err(line, ParseErrorKind::UndeclaredColumn(col.to_string())))?;
        let value = value.map(|v| number(v, line)).transpose()?;
        let c = &mut self.lp.columns[j];
        match (kind.as_str(), value) {
            ("UP", Some(v)) => {
                if v < 0.0 && c.lower == 0.0 {
                    log::warn!("line {line}: negative upper bound on `{col}` makes its lower bound -inf");
                    c.lower = f64::NEG_INFINITY;
                }
                c.upper = v;
            }
            ("LO", Some(v)) => c.lower = v,
            ("FX", Some(v)) => {
                c.lower = v;
                c.upper = v;
            }
            ("FR", None) => {
                c.lower = f64::NEG_INFINITY;
                c.upper = f64::INFINITY;
            }
            ("MI", None) => c.lower = f64::NEG_INFINITY,
            ("PL", None) => c.upper = f64::INFINITY,
            ("BV", None) => {
                log::warn!("line {line}: binary bound on `{col}` relaxed to [0, 1]");
                c.lower = 0.0;
                c.upper = 1.0;
            }
            ("LI", Some(v)) => {
                log::warn!("line {line}: integer bound on `{col}` treated as continuous");
                c.lower = v;
            }
            ("UI", Some(v)) => {
                log::warn!("line {line}: integer bound on `{col}` treated as continuous");
                c.upper = v;
            }
            _ => return Err(Self::err(line, ParseErrorKind::UnknownBoundType(kind))),
        }
        Ok(())
    }
}

fn section_of(word: &str) -> Option<Section> {
    Some(match word.to_ascii_uppercase().as_str() {
        "NAME" => Section::Name,
        "OBJSENSE" => Section::ObjSense,
        "ROWS" => Section::Rows,
        "COLUMNS" => Section::Columns,
        "RHS" => Section::Rhs,
        "RANGES" => Section::Ranges,
        "BOUNDS" => Section::Bounds,
        "ENDATA" => Section::End,
        _ => return None,
    })
}

fn sense_of(word: &str, line: usize) -> Result<Sense, ParseError> {
    match word.to_ascii_uppercase().as_str() {
        "MIN" | "MINIMIZE" | "MINIMISE" => Ok(Sense::Minimize),
        "MAX" | "MAXIMIZE" | "MAXIMISE" => Ok(Sense::Maximize),
        other => Err(ParseError { line, kind: ParseErrorKind::Malformed(format!("unknown objective sense `{other}`")) }),
    }
}

/// Parses free-format MPS. Section headers start in the first column; data
/// lines are indented. Lines starting with `*` are comments.
pub fn parse_mps(text: &str) -> Result<GeneralLP, ParseError> {
    let mut p = Parser {
        lp: GeneralLP::default(),
        row_index: HashMap::new(),
        col_index: HashMap::new(),
        objective_seen: false,
    };
    let mut section = Section::Preamble;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            section = section_of(toks[0])
                .ok_or_else(|| Parser::err(line, ParseErrorKind::UnknownSection(toks[0].to_string())))?;
            match section {
                Section::Name => p.lp.name = toks[1..].join(" "),
                Section::ObjSense if toks.len() > 1 => p.lp.sense = sense_of(toks[1], line)?,
                Section::End => break,
                _ => {}
            }
            continue;
        }
        match section {
            Section::Preamble | Section::Name | Section::End => {
                return Err(Parser::err(line, ParseErrorKind::Malformed("data outside a section".into())));
            }
            Section::ObjSense => p.lp.sense = sense_of(toks[0], line)?,
            Section::Rows => p.row(&toks, line)?,
            Section::Columns => p.column(&toks, line)?,
            Section::Rhs => p.row_values(&toks, line, false)?,
            Section::Ranges => p.row_values(&toks, line, true)?,
            Section::Bounds => p.bound(&toks, line)?,
        }
    }
    if !p.objective_seen {
        p.lp.objective_name = "COST".into();
    }
    Ok(p.lp)
}

/// Parses bytes, rejecting invalid UTF-8.
pub fn parse_mps_bytes(bytes: &[u8]) -> Result<GeneralLP, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|_| ParseError { line: 0, kind: ParseErrorKind::Encoding })?;
    parse_mps(text)
}

/// Parses MPS text and reduces it to standard form.
pub fn read_standard(text: &str) -> Result<(StandardFormLP, VariableMap), MpsError> {
    let g = parse_mps(text)?;
    Ok(to_standard_form(&g)?)
}

fn usable_names(names: &Names) -> bool {
    let ok = |v: &[String]| {
        let mut seen = HashSet::new();
        v.iter().all(|s| !s.is_empty() && !s.contains(char::is_whitespace) && !s.starts_with('*') && seen.insert(s.as_str()))
    };
    ok(&names.rows) && ok(&names.cols)
}

/// Emits a standard-form LP as free-format MPS: every row an equality, every
/// column in `[0, inf)`. Missing or unusable names are replaced by
/// `R0001...` / `C0001...`. Every column appears at least once so that empty
/// columns survive a round trip.
pub fn write_mps(lp: &StandardFormLP, name: &str) -> String {
    let names = match lp.names() {
        Some(n) if usable_names(n) => n.clone(),
        _ => default_names(lp.n_rows(), lp.n_cols()),
    };
    let row_set: HashSet<&str> = names.rows.iter().map(String::as_str).collect();
    let mut obj = String::from("COST");
    let mut k = 1;
    while row_set.contains(obj.as_str()) {
        obj = format!("COST{k}");
        k += 1;
    }

    let mut out = String::new();
    let title = if name.trim().is_empty() { "LP" } else { name.trim() };
    writeln!(out, "NAME          {title}").unwrap();
    out.push_str("ROWS\n");
    writeln!(out, " N  {obj}").unwrap();
    for r in &names.rows {
        writeln!(out, " E  {r}").unwrap();
    }
    out.push_str("COLUMNS\n");
    for j in 0..lp.n_cols() {
        let col = &names.cols[j];
        let cost = lp.c()[j];
        let (rows, vals) = lp.a().column(j);
        if cost != 0.0 || rows.is_empty() {
            writeln!(out, "    {col}  {obj}  {}", fmt_real(cost)).unwrap();
        }
        for (&i, &v) in rows.iter().zip(vals) {
            writeln!(out, "    {col}  {}  {}", names.rows[i], fmt_real(v)).unwrap();
        }
    }
    out.push_str("RHS\n");
    for (i, &b) in lp.b().iter().enumerate() {
        if b != 0.0 {
            writeln!(out, "    RHS  {}  {}", names.rows[i], fmt_real(b)).unwrap();
        }
    }
    out.push_str("BOUNDS\nENDATA\n");
    out
}
