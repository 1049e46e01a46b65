//! Solution quality measures and the per-iteration CSV trace.

use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// How the relative objective error against a known optimum is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorConvention {
    /// `(f - f*) / max(1, |f*|)`.
    ScaledGap,
    /// `(f* - f) / f`.
    RelativeShortfall,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("reference optimum must be finite, got {0}")]
    NonFiniteReference(f64),
    #[error("objective is zero; (f* - f) / f is undefined")]
    ZeroObjective,
}

pub fn objective_error(f: f64, f_star: f64, convention: ErrorConvention) -> Result<f64, ReportError> {
    if !f_star.is_finite() {
        return Err(ReportError::NonFiniteReference(f_star));
    }
    match convention {
        ErrorConvention::ScaledGap => Ok((f - f_star) / f_star.abs().max(1.0)),
        ErrorConvention::RelativeShortfall => {
            if f == 0.0 {
                Err(ReportError::ZeroObjective)
            } else {
                Ok((f_star - f) / f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    /// `||A x - b||_2`.
    pub residual_norm: f64,
    pub objective: f64,
    pub objective_error_scaled: Option<f64>,
    pub objective_error_relative: Option<f64>,
    pub iterations: usize,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

impl SolutionReport {
    pub fn new(residual_norm: f64, objective: f64, iterations: usize, elapsed: f64) -> Self {
        Self {
            residual_norm,
            objective,
            objective_error_scaled: None,
            objective_error_relative: None,
            iterations,
            elapsed,
        }
    }

    /// Fills both error measures from a known optimum. The relative shortfall is
    /// left empty when the objective is exactly zero.
    pub fn with_reference(mut self, f_star: f64) -> Result<Self, ReportError> {
        self.objective_error_scaled = Some(objective_error(self.objective, f_star, ErrorConvention::ScaledGap)?);
        self.objective_error_relative = objective_error(self.objective, f_star, ErrorConvention::RelativeShortfall).ok();
        Ok(self)
    }
}

impl fmt::Display for SolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "residual_norm  {:.6e}", self.residual_norm)?;
        writeln!(f, "objective      {:.10}", self.objective)?;
        if let Some(e) = self.objective_error_scaled {
            writeln!(f, "error_scaled   {:.6e}", e)?;
        }
        if let Some(e) = self.objective_error_relative {
            writeln!(f, "error_relative {:.6e}", e)?;
        }
        writeln!(f, "iterations     {}", self.iterations)?;
        write!(f, "elapsed_s      {:.3}", self.elapsed)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:?}")
}

/// One row of the outer-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub mu: f64,
    pub lambda_norm: f64,
    pub residual_norm: f64,
    pub objective: f64,
    pub h_value: f64,
}

pub const TRACE_HEADER: [&str; 6] = ["iter", "mu", "lambda_norm", "residual_norm", "objective", "h_value"];

impl TraceRow {
    fn fields(&self) -> [String; 6] {
        [
            self.iter.to_string(),
            fmt_real(self.mu),
            fmt_real(self.lambda_norm),
            fmt_real(self.residual_norm),
            fmt_real(self.objective),
            fmt_real(self.h_value),
        ]
    }
}

/// Writes the trace with a mandatory header. When `mode` is given an extra
/// trailing `mode` column is emitted on every row.
pub fn write_trace_csv<W: Write>(out: &mut W, rows: &[TraceRow], mode: Option<&str>) -> io::Result<()> {
    let mut header = TRACE_HEADER.join(",");
    if mode.is_some() {
        header.push_str(",mode");
    }
    writeln!(out, "{header}")?;
    for row in rows {
        let mut line = row.fields().join(",");
        if let Some(mode) = mode {
            line.push(',');
            line.push_str(mode);
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
