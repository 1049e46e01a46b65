//! The penalty crash: approximate minimisation of
//! `h(x) = c^T x + lambda^T r(x) + (1 / 2 mu) r(x)^T r(x)` over `x >= 0` by
//! exact single-coordinate steps, with `mu` and `lambda` updated between
//! outer iterations.

mod config;

use std::time::Instant;

use thiserror::Error;

pub use config::{
    auto_mu0, auto_mu_update_period, auto_outer_iterations, Choice, ConfigError, IdiotConfig,
    ResolvedConfig, FIELD_NAMES, MAX_SAMPLE_ITERATIONS,
};

use crate::model::{dot, norm2, norm_inf, ModelError, Point, StandardFormLP};
use crate::report::{SolutionReport, TraceRow};

/// Relative residual improvement per check interval below which a sweep is cut short.
pub const PROGRESS_MIN_RELATIVE: f64 = 0.01;

/// The run stops once `||r||_2 <= RESIDUAL_TOLERANCE * (1 + ||b||_2)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdiotError {
    #[error("objective unbounded below along column {column} (empty column with negative cost)")]
    UnboundedRay { column: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("starting point has negative component {index}")]
    NegativeStart { index: usize },
}

/// Mutable solver state. The residual is maintained incrementally and
/// re-synchronised against a fresh `A x - b` at outer-iteration boundaries.
#[derive(Debug, Clone)]
pub struct IdiotState {
    pub x: Point,
    pub r: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub outer_iter: usize,
    pub residual_norm_history: Vec<f64>,
    pub steps: u64,
}

impl IdiotState {
    pub fn new(lp: &StandardFormLP, x0: Option<Point>, mu: f64) -> Result<Self, IdiotError> {
        let x = x0.unwrap_or_else(|| Point::origin(lp.n_cols()));
        if let Some(index) = x.iter().position(|&v| !(v >= 0.0)) {
            return Err(IdiotError::NegativeStart { index });
        }
        if !(mu > 0.0) {
            return Err(ModelError::NonPositiveMu(mu).into());
        }
        let r = lp.residual(&x)?;
        Ok(Self {
            x,
            r,
            lambda: vec![0.0; lp.n_rows()],
            mu,
            outer_iter: 0,
            residual_norm_history: Vec::new(),
            steps: 0,
        })
    }

    pub fn residual_norm(&self) -> f64 {
        norm2(&self.r)
    }

    /// `h` at the current point, evaluated from the maintained residual.
    pub fn h_value(&self, lp: &StandardFormLP) -> f64 {
        dot(lp.c(), &self.x) + dot(&self.lambda, &self.r) + dot(&self.r, &self.r) / (2.0 * self.mu)
    }

    /// Replaces the incremental residual with `A x - b` and returns the
    /// largest absolute discrepancy that had accumulated.
    pub fn resync(&mut self, lp: &StandardFormLP) -> f64 {
        let fresh = lp.residual(&self.x).expect("state dimensions fixed at construction");
        let drift = self
            .r
            .iter()
            .zip(&fresh)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        self.r = fresh;
        drift
    }
}

/// Result of one coordinate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// `x_j` moved by `delta`, changing `h` by `delta_h <= 0`.
    Moved { delta: f64, delta_h: f64 },
    Unchanged,
}

/// Exactly minimises `h` along coordinate `j` subject to `x_j >= 0`.
///
/// With `q = ||a_j||^2` and `g = c_j + lambda^T a_j + r^T a_j / mu`, the step is
/// `t = max(-x_j, -mu g / q)`. The product `mu g` is formed directly so that
/// tiny `mu` does not amplify rounding in `r^T a_j`.
#[inline]
pub fn coordinate_step(lp: &StandardFormLP, state: &mut IdiotState, j: usize) -> Result<Step, IdiotError> {
    let a = lp.a();
    let q = a.col_sq_norm(j);
    let cj = lp.c()[j];
    let xj = state.x[j];
    if q == 0.0 {
        if cj < 0.0 {
            return Err(IdiotError::UnboundedRay { column: j });
        }
        if xj != 0.0 {
            state.x[j] = 0.0;
            state.steps += 1;
            return Ok(Step::Moved { delta: -xj, delta_h: -cj * xj });
        }
        return Ok(Step::Unchanged);
    }
    let (rows, vals) = a.column(j);
    let mut lambda_dot = 0.0;
    let mut r_dot = 0.0;
    for (&i, &v) in rows.iter().zip(vals) {
        lambda_dot += state.lambda[i] * v;
        r_dot += state.r[i] * v;
    }
    let mu = state.mu;
    let scaled_grad = mu * (cj + lambda_dot) + r_dot;
    let unconstrained = -scaled_grad / q;
    let t = unconstrained.max(-xj);
    if t == 0.0 || xj + t == xj {
        return Ok(Step::Unchanged);
    }
    let new_x = (xj + t).max(0.0);
    let t = new_x - xj;
    state.x[j] = new_x;
    for (&i, &v) in rows.iter().zip(vals) {
        state.r[i] += t * v;
    }
    state.steps += 1;
    let delta_h = t * (scaled_grad + 0.5 * q * t) / mu;
    Ok(Step::Moved { delta: t, delta_h })
}

/// Hooks for watching a solve. Default methods do nothing.
pub trait Observer {
    fn after_step(&mut self, _lp: &StandardFormLP, _state: &IdiotState, _j: usize, _step: Step) {}
    fn after_outer(&mut self, _lp: &StandardFormLP, _state: &IdiotState, _drift: f64) {}
}

impl Observer for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub repeats_done: usize,
    pub truncated: bool,
    pub steps: u64,
}

/// Progress-check parameters used by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProgressCheck {
    pub start: usize,
    pub stride: usize,
    pub window: usize,
}

impl ProgressCheck {
    pub fn from_config(cfg: &ResolvedConfig) -> Self {
        Self {
            start: cfg.progress_check_start,
            stride: cfg.progress_check_stride,
            window: cfg.moving_average_window,
        }
    }

    fn is_check(&self, repeat: usize) -> bool {
        repeat >= self.start && (repeat - self.start) % self.stride == 0
    }

    /// Compares the mean residual over the latest `window` repeats with the
    /// mean over the window ending `stride` repeats earlier.
    fn enough_progress(&self, norms: &[f64]) -> bool {
        let k = norms.len();
        let w = self.window.min(k);
        let current = mean(&norms[k - w..]);
        if k < self.stride + 1 {
            return true;
        }
        let end = k - self.stride;
        let w_prev = self.window.min(end);
        let previous = mean(&norms[end - w_prev..end]);
        if previous <= 0.0 {
            return false;
        }
        (previous - current) / previous >= PROGRESS_MIN_RELATIVE
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs `repeats` passes of [`coordinate_step`] over `j = 0..n`, cutting the
/// sweep short when the residual stops improving.
pub fn sweep<O: Observer>(
    lp: &StandardFormLP,
    state: &mut IdiotState,
    repeats: usize,
    check: ProgressCheck,
    observer: &mut O,
) -> Result<SweepSummary, IdiotError> {
    let n = lp.n_cols();
    let steps_before = state.steps;
    let mut norms = Vec::with_capacity(repeats);
    for repeat in 1..=repeats {
        for j in 0..n {
            let step = coordinate_step(lp, state, j)?;
            observer.after_step(lp, state, j, step);
        }
        norms.push(state.residual_norm());
        if check.is_check(repeat) && !check.enough_progress(&norms) {
            return Ok(SweepSummary {
                repeats_done: repeat,
                truncated: repeat < repeats,
                steps: state.steps - steps_before,
            });
        }
    }
    Ok(SweepSummary {
        repeats_done: repeats,
        truncated: false,
        steps: state.steps - steps_before,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdiotStatus {
    ConvergedResidual,
    IterationLimit,
    AbandonedSamplePhase,
    UnboundedRayDetected,
}

impl IdiotStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            IdiotStatus::ConvergedResidual => "converged_residual",
            IdiotStatus::IterationLimit => "iteration_limit",
            IdiotStatus::AbandonedSamplePhase => "abandoned_sample_phase",
            IdiotStatus::UnboundedRayDetected => "unbounded_ray_detected",
        }
    }
}

/// Which parameter an outer iteration changed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Update {
    Mu,
    Lambda,
}

#[derive(Debug, Clone)]
pub struct IdiotOutcome {
    pub status: IdiotStatus,
    pub point: Point,
    pub report: SolutionReport,
    pub trace: Vec<TraceRow>,
    /// Parameter changed after each recorded outer iteration (none after the last).
    pub updates: Vec<Update>,
    pub final_mu: f64,
    pub final_lambda: Vec<f64>,
    /// Largest incremental-residual drift seen at any outer boundary.
    pub max_residual_drift: f64,
    /// Outer iteration at which the sample gate passed, if it did.
    pub sample_passed_at: Option<usize>,
    pub resolved: ResolvedConfig,
}

/// Runs the crash with default observation.
pub fn run_idiot(lp: &StandardFormLP, config: &IdiotConfig, x0: Option<Point>) -> Result<IdiotOutcome, IdiotError> {
    run_idiot_observed(lp, config, x0, &mut ())
}

pub fn run_idiot_observed<O: Observer>(
    lp: &StandardFormLP,
    config: &IdiotConfig,
    x0: Option<Point>,
    observer: &mut O,
) -> Result<IdiotOutcome, IdiotError> {
    let started = Instant::now();
    let cfg = config.resolve(lp)?;
    let mut state = IdiotState::new(lp, x0, cfg.mu0)?;
    let start = state.x.clone();
    let initial_norm = state.residual_norm();
    let tolerance = RESIDUAL_TOLERANCE * (1.0 + norm2(lp.b()));
    let main_check = ProgressCheck::from_config(&cfg);
    let warmup_check = ProgressCheck { start: usize::MAX, ..main_check };

    let mut run = Run {
        lp,
        cfg: &cfg,
        trace: Vec::new(),
        updates: Vec::new(),
        max_drift: 0.0,
    };
    let mut sample_passed_at = None;

    let finish = |status: IdiotStatus, state: IdiotState, run: Run<'_>, point: Point, passed: Option<usize>| {
        let residual_norm = norm2(&lp.residual(&point).expect("dimensions checked"));
        let objective = dot(lp.c(), &point);
        IdiotOutcome {
            status,
            report: SolutionReport::new(residual_norm, objective, state.outer_iter, started.elapsed().as_secs_f64()),
            point,
            trace: run.trace,
            updates: run.updates,
            final_mu: state.mu,
            final_lambda: state.lambda,
            max_residual_drift: run.max_drift,
            sample_passed_at: passed,
            resolved: cfg.clone(),
        }
    };

    let sample_limit = cfg.sample_iterations.min(cfg.outer_iterations);
    let mut passed = false;
    while state.outer_iter < sample_limit {
        match run.outer(&mut state, cfg.warmup_sweeps, warmup_check, observer) {
            Err(IdiotError::UnboundedRay { .. }) => {
                let point = state.x.clone();
                return Ok(finish(IdiotStatus::UnboundedRayDetected, state, run, point, None));
            }
            Err(e) => return Err(e),
            Ok(()) => {}
        }
        let norm = state.residual_norm();
        if norm <= tolerance {
            let point = state.x.clone();
            return Ok(finish(IdiotStatus::ConvergedResidual, state, run, point, None));
        }
        if norm <= (1.0 - cfg.sample_required_reduction) * initial_norm {
            passed = true;
            sample_passed_at = Some(state.outer_iter);
            run.update(&mut state);
            break;
        }
        if state.outer_iter < sample_limit {
            run.update(&mut state);
        }
    }
    if !passed {
        if state.outer_iter >= cfg.outer_iterations {
            let point = state.x.clone();
            return Ok(finish(IdiotStatus::IterationLimit, state, run, point, None));
        }
        log::info!("sample phase abandoned after {} iterations", state.outer_iter);
        return Ok(finish(IdiotStatus::AbandonedSamplePhase, state, run, start, None));
    }

    while state.outer_iter < cfg.outer_iterations {
        match run.outer(&mut state, cfg.main_sweeps, main_check, observer) {
            Err(IdiotError::UnboundedRay { .. }) => {
                let point = state.x.clone();
                return Ok(finish(IdiotStatus::UnboundedRayDetected, state, run, point, sample_passed_at));
            }
            Err(e) => return Err(e),
            Ok(()) => {}
        }
        if state.residual_norm() <= tolerance {
            let point = state.x.clone();
            return Ok(finish(IdiotStatus::ConvergedResidual, state, run, point, sample_passed_at));
        }
        if state.outer_iter < cfg.outer_iterations {
            run.update(&mut state);
        }
    }
    let point = state.x.clone();
    Ok(finish(IdiotStatus::IterationLimit, state, run, point, sample_passed_at))
}

struct Run<'a> {
    lp: &'a StandardFormLP,
    cfg: &'a ResolvedConfig,
    trace: Vec<TraceRow>,
    updates: Vec<Update>,
    max_drift: f64,
}

impl Run<'_> {
    fn outer<O: Observer>(
        &mut self,
        state: &mut IdiotState,
        repeats: usize,
        check: ProgressCheck,
        observer: &mut O,
    ) -> Result<(), IdiotError> {
        state.outer_iter += 1;
        let summary = sweep(self.lp, state, repeats, check, observer)?;
        let drift = state.resync(self.lp);
        self.max_drift = self.max_drift.max(drift);
        observer.after_outer(self.lp, state, drift);
        let residual_norm = state.residual_norm();
        state.residual_norm_history.push(residual_norm);
        self.trace.push(TraceRow {
            iter: state.outer_iter,
            mu: state.mu,
            lambda_norm: norm2(&state.lambda),
            residual_norm,
            objective: dot(self.lp.c(), &state.x),
            h_value: state.h_value(self.lp),
        });
        log::debug!(
            "iter {:>3} mu {:.3e} |r| {:.3e} repeats {} steps {}",
            state.outer_iter,
            state.mu,
            residual_norm,
            summary.repeats_done,
            summary.steps
        );
        Ok(())
    }

    /// Changes exactly one of `mu` and `lambda`. `mu` is reduced on every
    /// `mu_update_period`-th iteration unless it already sits at the floor;
    /// otherwise `lambda` is replaced by `mu * r(x)`.
    fn update(&mut self, state: &mut IdiotState) {
        let mu_turn = state.outer_iter % self.cfg.mu_update_period == 0;
        if mu_turn && state.mu > self.cfg.mu_floor {
            state.mu = (state.mu * self.cfg.mu_factor).max(self.cfg.mu_floor);
            self.updates.push(Update::Mu);
        } else {
            let mu = state.mu;
            for (l, &r) in state.lambda.iter_mut().zip(&state.r) {
                *l = mu * r;
            }
            self.updates.push(Update::Lambda);
        }
    }
}

/// `||lambda||_inf`, exposed for shrinkage checks.
pub fn lambda_inf(state: &IdiotState) -> f64 {
    norm_inf(&state.lambda)
}
