//! Reference penalty methods with (near) exact subproblem minimisation:
//! the penalty crash with exact inner solves, the pure quadratic penalty
//! method, and the augmented Lagrangian method.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::idiot::{coordinate_step, IdiotError, IdiotState, Update};
use crate::model::{dot, norm2, ModelError, Point, StandardFormLP};
use crate::report::{write_trace_csv, TraceRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("objective unbounded below along column {column}")]
    UnboundedRay { column: usize },
    #[error("subproblem tolerance not reached after {sweeps} sweeps (worst violation {violation:e})")]
    ToleranceNotReached { best: Point, sweeps: usize, violation: f64 },
    #[error("invalid lab config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<IdiotError> for LabError {
    fn from(e: IdiotError) -> Self {
        match e {
            IdiotError::UnboundedRay { column } => LabError::UnboundedRay { column },
            IdiotError::Model(m) => LabError::Model(m),
            other => LabError::Config(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ExactIdiot,
    QuadraticPenalty,
    AugmentedLagrangian,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::ExactIdiot, Mode::QuadraticPenalty, Mode::AugmentedLagrangian];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::ExactIdiot => "exact_idiot",
            Mode::QuadraticPenalty => "quadratic_penalty",
            Mode::AugmentedLagrangian => "augmented_lagrangian",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| LabError::Config(format!("unknown mode `{s}`")))
    }
}

/// Multiplier step of the augmented Lagrangian mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierUpdate {
    /// `lambda + mu r`.
    ScaledByMu,
    /// `lambda + r / mu`, the step matching a `1 / (2 mu)` penalty weight.
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuSchedule {
    pub initial: f64,
    pub factor: f64,
    pub floor: f64,
    /// `mu` is reduced on iterations divisible by this; the multipliers change
    /// on the others.
    pub period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabConfig {
    pub mode: Mode,
    /// Initial subproblem tolerance; later ones follow `max(0.1 tau, 1e-10)`.
    pub tolerance: f64,
    pub mu: MuSchedule,
    pub multiplier_update: MultiplierUpdate,
    pub max_outer: usize,
    /// When false the multipliers stay at zero.
    pub lambda_updates: bool,
    /// Sweep cap per subproblem.
    pub max_sweeps: usize,
}

impl LabConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            tolerance: 1e-6,
            mu: MuSchedule { initial: 1.0, factor: 0.1, floor: 1e-12, period: 2 },
            multiplier_update: MultiplierUpdate::Conventional,
            max_outer: 40,
            lambda_updates: true,
            max_sweeps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |s: &str| Err(LabError::Config(s.to_string()));
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if !(self.mu.factor > 0.0 && self.mu.factor < 1.0) {
            return bad("mu factor must lie in (0, 1)");
        }
        if !(self.mu.initial > 0.0 && self.mu.floor > 0.0) {
            return bad("mu initial value and floor must be positive");
        }
        if self.mu.period == 0 || self.max_outer == 0 || self.max_sweeps == 0 {
            return bad("counts must be at least 1");
        }
        Ok(())
    }
}

pub const TOLERANCE_FLOOR: f64 = 1e-10;

/// Projected-gradient violation of coordinate `j`, relative to the
/// magnitudes that make up the gradient. The `Aᵀr / mu` term carries
/// rounding error of order `eps ||a_j|| (|A||x| + |b|) / mu`, which is
/// allowed for separately.
fn violation(lp: &StandardFormLP, x: &[f64], r: &[f64], lambda: &[f64], mu: f64, noise_ref: f64, j: usize) -> f64 {
    let a = lp.a();
    let (rows, vals) = a.column(j);
    let mut ld = 0.0;
    let mut rd = 0.0;
    for (&i, &v) in rows.iter().zip(vals) {
        ld += lambda[i] * v;
        rd += r[i] * v;
    }
    let cj = lp.c()[j];
    let g = cj + ld + rd / mu;
    let pg = if x[j] > 0.0 { g.abs() } else { (-g).max(0.0) };
    let noise = 64.0 * f64::EPSILON * a.col_sq_norm(j).sqrt() * noise_ref / mu;
    (pg - noise).max(0.0) / (1.0 + cj.abs() + ld.abs())
}

fn worst_violation(lp: &StandardFormLP, state: &IdiotState) -> f64 {
    let abs_ax: f64 = {
        let mut v = vec![0.0; lp.n_rows()];
        for j in 0..lp.n_cols() {
            for (i, a) in lp.a().column_iter(j) {
                v[i] += (a * state.x[j]).abs();
            }
        }
        norm2(&v)
    };
    let noise_ref = abs_ax + norm2(lp.b());
    (0..lp.n_cols())
        .map(|j| violation(lp, &state.x, &state.r, &state.lambda, state.mu, noise_ref, j))
        .fold(0.0, f64::max)
}

/// Minimises `h` for fixed `lambda`, `mu` over `x >= 0` by coordinate sweeps
/// until every projected-gradient component is within `tol` (relative to the
/// size of the gradient's terms). The residual is recomputed from scratch
/// after every sweep.
pub fn minimize_subproblem(
    lp: &StandardFormLP,
    lambda: &[f64],
    mu: f64,
    x_start: &Point,
    tol: f64,
    max_sweeps: usize,
) -> Result<Point, LabError> {
    if !(tol > 0.0) {
        return Err(LabError::Config("tolerance must be positive".into()));
    }
    if lambda.len() != lp.n_rows() {
        return Err(ModelError::Dimension { what: "multiplier length", expected: lp.n_rows(), got: lambda.len() }.into());
    }
    let mut state = IdiotState::new(lp, Some(x_start.clone()), mu)?;
    state.lambda = lambda.to_vec();
    let mut worst = worst_violation(lp, &state);
    let mut sweeps = 0;
    while worst > tol {
        if sweeps == max_sweeps {
            return Err(LabError::ToleranceNotReached { best: state.x, sweeps, violation: worst });
        }
        for j in 0..lp.n_cols() {
            coordinate_step(lp, &mut state, j)?;
        }
        state.resync(lp);
        sweeps += 1;
        worst = worst_violation(lp, &state);
    }
    log::trace!("subproblem mu {mu:.3e} solved in {sweeps} sweeps");
    Ok(state.x)
}

/// One outer iteration of a lab run.
#[derive(Debug, Clone, PartialEq)]
pub struct LabIterate {
    pub iter: usize,
    /// Subproblem minimiser `x^k`.
    pub x: Point,
    /// Multipliers used in `h^k`.
    pub lambda: Vec<f64>,
    /// Penalty parameter used in `h^k`.
    pub mu: f64,
    pub tolerance: f64,
    pub residual: Vec<f64>,
    pub objective: f64,
    pub h_value: f64,
    /// Parameter changed after this iteration; `None` if nothing changed.
    pub update: Option<Update>,
}

impl LabIterate {
    pub fn residual_norm(&self) -> f64 {
        norm2(&self.residual)
    }

    pub fn trace_row(&self) -> TraceRow {
        TraceRow {
            iter: self.iter,
            mu: self.mu,
            lambda_norm: norm2(&self.lambda),
            residual_norm: self.residual_norm(),
            objective: self.objective,
            h_value: self.h_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mode: Mode,
    pub iterates: Vec<LabIterate>,
    pub final_lambda: Vec<f64>,
    pub final_mu: f64,
}

impl Trajectory {
    pub fn last(&self) -> &LabIterate {
        self.iterates.last().expect("a run records at least one iterate")
    }

    pub fn trace_rows(&self) -> Vec<TraceRow> {
        self.iterates.iter().map(LabIterate::trace_row).collect()
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write_trace_csv(out, &self.trace_rows(), Some(self.mode.as_str()))
    }
}

fn record(lp: &StandardFormLP, iter: usize, x: Point, lambda: &[f64], mu: f64, tolerance: f64) -> LabIterate {
    let residual = lp.residual(&x).expect("dimensions fixed");
    let objective = dot(lp.c(), &x);
    let h_value = objective + dot(lambda, &residual) + dot(&residual, &residual) / (2.0 * mu);
    LabIterate {
        iter,
        x,
        lambda: lambda.to_vec(),
        mu,
        tolerance,
        residual,
        objective,
        h_value,
        update: None,
    }
}

fn next_tolerance(tau: f64) -> f64 {
    (0.1 * tau).max(TOLERANCE_FLOOR)
}

/// Dispatches on `config.mode`.
pub fn run(lp: &StandardFormLP, config: &LabConfig, x0: Option<Point>) -> Result<Trajectory, LabError> {
    match config.mode {
        Mode::ExactIdiot => run_exact_idiot(lp, config, x0),
        Mode::QuadraticPenalty => run_quadratic_penalty(lp, config, x0),
        Mode::AugmentedLagrangian => run_augmented_lagrangian(lp, config, x0),
    }
}

/// Shared outer loop of the exact crash and the augmented Lagrangian: on
/// iterations divisible by the period `mu` shrinks (unless at its floor),
/// otherwise `step` produces the next multipliers.
fn multiplier_loop(
    lp: &StandardFormLP,
    config: &LabConfig,
    x0: Option<Point>,
    step: impl Fn(&[f64], &[f64], f64) -> Vec<f64>,
) -> Result<Trajectory, LabError> {
    config.validate()?;
    let mut x = x0.unwrap_or_else(|| Point::origin(lp.n_cols()));
    let mut lambda = vec![0.0; lp.n_rows()];
    let mut mu = config.mu.initial;
    let mut tau = config.tolerance;
    let mut iterates: Vec<LabIterate> = Vec::with_capacity(config.max_outer);
    for k in 1..=config.max_outer {
        x = minimize_subproblem(lp, &lambda, mu, &x, tau, config.max_sweeps)?;
        let mut it = record(lp, k, x.clone(), &lambda, mu, tau);
        if k < config.max_outer {
            if k % config.mu.period == 0 && mu > config.mu.floor {
                mu = (mu * config.mu.factor).max(config.mu.floor);
                it.update = Some(Update::Mu);
            } else if config.lambda_updates {
                lambda = step(&lambda, &it.residual, mu);
                it.update = Some(Update::Lambda);
            }
            tau = next_tolerance(tau);
        }
        iterates.push(it);
    }
    Ok(Trajectory { mode: config.mode, iterates, final_lambda: lambda, final_mu: mu })
}

/// The crash's outer loop with each subproblem solved to tolerance:
/// `lambda <- mu r(x)` on multiplier turns.
pub fn run_exact_idiot(lp: &StandardFormLP, config: &LabConfig, x0: Option<Point>) -> Result<Trajectory, LabError> {
    let mut cfg = config.clone();
    cfg.mode = Mode::ExactIdiot;
    multiplier_loop(lp, &cfg, x0, |_, r, mu| r.iter().map(|ri| mu * ri).collect())
}

/// Augmented Lagrangian: multipliers accumulate,
/// `lambda + mu r` or `lambda + r / mu` depending on `multiplier_update`.
pub fn run_augmented_lagrangian(lp: &StandardFormLP, config: &LabConfig, x0: Option<Point>) -> Result<Trajectory, LabError> {
    let mut cfg = config.clone();
    cfg.mode = Mode::AugmentedLagrangian;
    let scaled = cfg.multiplier_update == MultiplierUpdate::ScaledByMu;
    multiplier_loop(lp, &cfg, x0, move |lambda, r, mu| {
        lambda
            .iter()
            .zip(r)
            .map(|(l, ri)| if scaled { l + mu * ri } else { l + ri / mu })
            .collect()
    })
}

/// Pure quadratic penalty: `lambda = 0` throughout, `mu` reduced on the same
/// cadence as the other modes.
pub fn run_quadratic_penalty(lp: &StandardFormLP, config: &LabConfig, x0: Option<Point>) -> Result<Trajectory, LabError> {
    config.validate()?;
    let zero = vec![0.0; lp.n_rows()];
    let mut x = x0.unwrap_or_else(|| Point::origin(lp.n_cols()));
    let mut mu = config.mu.initial;
    let mut tau = config.tolerance;
    let mut iterates = Vec::with_capacity(config.max_outer);
    for k in 1..=config.max_outer {
        x = minimize_subproblem(lp, &zero, mu, &x, tau, config.max_sweeps)?;
        let mut it = record(lp, k, x.clone(), &zero, mu, tau);
        if k < config.max_outer {
            if k % config.mu.period == 0 && mu > config.mu.floor {
                mu = (mu * config.mu.factor).max(config.mu.floor);
                it.update = Some(Update::Mu);
            }
            tau = next_tolerance(tau);
        }
        iterates.push(it);
    }
    Ok(Trajectory { mode: Mode::QuadraticPenalty, iterates, final_lambda: zero, final_mu: mu })
}

/// `r^T r <= 2 mu (c^T xbar - c^T x - lambda^T r)` for a feasible `xbar`,
/// evaluated at one iterate. Returns `(lhs, rhs)`.
pub fn proof_inequality(lp: &StandardFormLP, it: &LabIterate, feasible: &[f64]) -> (f64, f64) {
    let r = &it.residual;
    let lhs = dot(r, r);
    let rhs = 2.0 * it.mu * (dot(lp.c(), feasible) - it.objective - dot(&it.lambda, r));
    (lhs, rhs)
}
