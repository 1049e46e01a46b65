use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{norm_inf, StandardFormLP};

/// Hard cap on the number of sample iterations.
pub const MAX_SAMPLE_ITERATIONS: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected key=value, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("{field}: cannot parse `{value}`")]
    BadValue { field: String, value: String },
}

/// A parameter that is either fixed by the caller or derived from the problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Choice<T> {
    #[default]
    Auto,
    Fixed(T),
}

impl<T: FromStr> FromStr for Choice<T> {
    type Err = T::Err;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(Choice::Auto)
        } else {
            s.parse().map(Choice::Fixed)
        }
    }
}

impl<T: fmt::Display> fmt::Display for Choice<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Auto => f.write_str("auto"),
            Choice::Fixed(v) => v.fmt(f),
        }
    }
}

/// Schedule constants for the penalty crash.
#[derive(Debug, Clone, PartialEq)]
pub struct IdiotConfig {
    /// Total outer iterations, sample phase included. `Auto` picks a value in
    /// `[30, 200]` from the problem size.
    pub outer_iterations: Choice<usize>,
    /// Initial penalty parameter. `Auto` balances the cost and penalty terms
    /// at the origin, clamped to `[1e-3, 1]`.
    pub mu0: Choice<f64>,
    /// Multiplier applied to `mu` on a penalty update, in `(0, 1)`.
    pub mu_factor: f64,
    /// `mu` is reduced on every iteration divisible by this; `Auto` is 3 when
    /// `n / m < 2` and 6 otherwise.
    pub mu_update_period: Choice<usize>,
    pub warmup_sweeps: usize,
    pub main_sweeps: usize,
    pub progress_check_start: usize,
    pub progress_check_stride: usize,
    pub sample_iterations: usize,
    pub sample_required_reduction: f64,
    pub mu_floor: f64,
    pub moving_average_window: usize,
}

impl Default for IdiotConfig {
    fn default() -> Self {
        Self {
            outer_iterations: Choice::Auto,
            mu0: Choice::Auto,
            mu_factor: 0.333,
            mu_update_period: Choice::Auto,
            warmup_sweeps: 2,
            main_sweeps: 105,
            progress_check_start: 50,
            progress_check_stride: 10,
            sample_iterations: 20,
            sample_required_reduction: 0.10,
            mu_floor: 1e-17,
            moving_average_window: 5,
        }
    }
}

/// Every field of [`IdiotConfig`] with `Auto` settled for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    pub outer_iterations: usize,
    pub mu0: f64,
    pub mu_factor: f64,
    pub mu_update_period: usize,
    pub warmup_sweeps: usize,
    pub main_sweeps: usize,
    pub progress_check_start: usize,
    pub progress_check_stride: usize,
    pub sample_iterations: usize,
    pub sample_required_reduction: f64,
    pub mu_floor: f64,
    pub moving_average_window: usize,
}

pub const FIELD_NAMES: [&str; 12] = [
    "outer_iterations",
    "mu0",
    "mu_factor",
    "mu_update_period",
    "warmup_sweeps",
    "main_sweeps",
    "progress_check_start",
    "progress_check_stride",
    "sample_iterations",
    "sample_required_reduction",
    "mu_floor",
    "moving_average_window",
];

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

fn parse_field<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        field: key.to_string(),
        value: value.to_string(),
    })
}

impl IdiotConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.mu_factor > 0.0 && self.mu_factor < 1.0) {
            return Err(invalid("mu_factor", format!("{} not in (0, 1)", self.mu_factor)));
        }
        if !(self.mu_floor > 0.0 && self.mu_floor.is_finite()) {
            return Err(invalid("mu_floor", "must be positive"));
        }
        if let Choice::Fixed(mu0) = self.mu0 {
            if !(mu0 > 0.0 && mu0.is_finite()) {
                return Err(invalid("mu0", "must be positive"));
            }
        }
        if let Choice::Fixed(0) = self.outer_iterations {
            return Err(invalid("outer_iterations", "must be at least 1"));
        }
        if let Choice::Fixed(0) = self.mu_update_period {
            return Err(invalid("mu_update_period", "must be at least 1"));
        }
        for (field, value) in [
            ("warmup_sweeps", self.warmup_sweeps),
            ("main_sweeps", self.main_sweeps),
            ("progress_check_start", self.progress_check_start),
            ("progress_check_stride", self.progress_check_stride),
            ("sample_iterations", self.sample_iterations),
            ("moving_average_window", self.moving_average_window),
        ] {
            if value == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        if self.sample_iterations > MAX_SAMPLE_ITERATIONS {
            return Err(invalid(
                "sample_iterations",
                format!("{} exceeds the cap of {MAX_SAMPLE_ITERATIONS}", self.sample_iterations),
            ));
        }
        if self.progress_check_start > self.main_sweeps {
            return Err(invalid("progress_check_start", "must not exceed main_sweeps"));
        }
        if !(self.sample_required_reduction > 0.0 && self.sample_required_reduction < 1.0) {
            return Err(invalid("sample_required_reduction", "must be in (0, 1)"));
        }
        Ok(())
    }

    /// Sets one field from its textual form. Keys are the field names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key.trim() {
            "outer_iterations" => self.outer_iterations = parse_field(key, value)?,
            "mu0" => self.mu0 = parse_field(key, value)?,
            "mu_factor" => self.mu_factor = parse_field(key, value)?,
            "mu_update_period" => self.mu_update_period = parse_field(key, value)?,
            "warmup_sweeps" => self.warmup_sweeps = parse_field(key, value)?,
            "main_sweeps" => self.main_sweeps = parse_field(key, value)?,
            "progress_check_start" => self.progress_check_start = parse_field(key, value)?,
            "progress_check_stride" => self.progress_check_stride = parse_field(key, value)?,
            "sample_iterations" => self.sample_iterations = parse_field(key, value)?,
            "sample_required_reduction" => self.sample_required_reduction = parse_field(key, value)?,
            "mu_floor" => self.mu_floor = parse_field(key, value)?,
            "moving_average_window" => self.moving_average_window = parse_field(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn to_kv_text(&self) -> String {
        let values = [
            self.outer_iterations.to_string(),
            self.mu0.to_string(),
            self.mu_factor.to_string(),
            self.mu_update_period.to_string(),
            self.warmup_sweeps.to_string(),
            self.main_sweeps.to_string(),
            self.progress_check_start.to_string(),
            self.progress_check_stride.to_string(),
            self.sample_iterations.to_string(),
            self.sample_required_reduction.to_string(),
            format!("{:?}", self.mu_floor),
            self.moving_average_window.to_string(),
        ];
        FIELD_NAMES
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn resolve(&self, lp: &StandardFormLP) -> Result<ResolvedConfig, ConfigError> {
        self.validate()?;
        let outer_iterations = match self.outer_iterations {
            Choice::Fixed(v) => v,
            Choice::Auto => auto_outer_iterations(lp),
        };
        let mu0 = match self.mu0 {
            Choice::Fixed(v) => v,
            Choice::Auto => auto_mu0(lp),
        };
        let mu_update_period = match self.mu_update_period {
            Choice::Fixed(v) => v,
            Choice::Auto => auto_mu_update_period(lp),
        };
        Ok(ResolvedConfig {
            outer_iterations,
            mu0,
            mu_factor: self.mu_factor,
            mu_update_period,
            warmup_sweeps: self.warmup_sweeps,
            main_sweeps: self.main_sweeps,
            progress_check_start: self.progress_check_start,
            progress_check_stride: self.progress_check_stride,
            sample_iterations: self.sample_iterations,
            sample_required_reduction: self.sample_required_reduction,
            mu_floor: self.mu_floor,
            moving_average_window: self.moving_average_window,
        })
    }
}

/// `clamp(||b||_inf / max(1, ||c||_inf), 1e-3, 1)`.
pub fn auto_mu0(lp: &StandardFormLP) -> f64 {
    (norm_inf(lp.b()) / norm_inf(lp.c()).max(1.0)).clamp(1e-3, 1.0)
}

/// 3 when `n / m < 2`, else 6.
pub fn auto_mu_update_period(lp: &StandardFormLP) -> usize {
    if lp.n_rows() == 0 || (lp.n_cols() as f64) / (lp.n_rows() as f64) >= 2.0 {
        6
    } else {
        3
    }
}

/// 30 plus one iteration per 500 stored nonzeros, capped at 200.
pub fn auto_outer_iterations(lp: &StandardFormLP) -> usize {
    (30 + lp.a().nnz() / 500).min(200)
}
