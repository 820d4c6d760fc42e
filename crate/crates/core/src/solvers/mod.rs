//! Alternating zeroth-order min-max solver, its first-order counterpart and
//! the single-objective baselines.

mod gap;
mod problem;
mod rates;
mod run;

pub use gap::stationary_gap;
pub use problem::{GradFn, MetricHook, MinMaxProblem, ScalarFn, VecFn};
pub use rates::{theory_rates, TheoryRates};
pub use run::{fo_min_max, zo_finite_sum, zo_min_max, zo_pgd_reduced};

use std::fmt;

use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;

/// How the maximization block is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YMode {
    /// Zeroth-order projected gradient ascent (two-sided black box).
    ZoPga,
    /// Projected ascent with the analytic gradient (one-sided black box).
    FoPga,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub iters: usize,
    pub estimator_x: EstimatorConfig,
    /// Falls back to `estimator_x` when absent.
    pub estimator_y: Option<EstimatorConfig>,
    pub y_mode: YMode,
    pub seed: u64,
    /// Gap and metric diagnostics are recorded every `gap_every` iterations
    /// and always at the first and last record.
    pub gap_every: usize,
    /// Record wall-clock milliseconds. Off by default so traces are reproducible byte for byte.
    pub wall_clock: bool,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
}

impl SolverConfig {
    pub fn new(alpha: f64, beta: f64, iters: usize, estimator: EstimatorConfig) -> Self {
        SolverConfig {
            alpha,
            beta,
            iters,
            estimator_x: estimator,
            estimator_y: None,
            y_mode: YMode::ZoPga,
            seed: 0,
            gap_every: 1,
            wall_clock: false,
            x0: None,
            y0: None,
        }
    }

    pub fn with_y_mode(mut self, mode: YMode) -> Self {
        self.y_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_gap_every(mut self, every: usize) -> Self {
        self.gap_every = every;
        self
    }

    pub fn with_estimator_y(mut self, est: EstimatorConfig) -> Self {
        self.estimator_y = Some(est);
        self
    }

    pub fn with_start(mut self, x0: Vec<f64>, y0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self.y0 = Some(y0);
        self
    }

    pub fn estimator_for_y(&self) -> EstimatorConfig {
        self.estimator_y.unwrap_or(self.estimator_x)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if self.iters == 0 {
            return Err(Error::Invalid("iters must be at least 1".into()));
        }
        if self.gap_every == 0 {
            return Err(Error::Invalid("gap_every must be at least 1".into()));
        }
        self.estimator_x.validate()?;
        if let Some(e) = &self.estimator_y {
            e.validate()?;
        }
        Ok(())
    }

    /// Oracle queries a `zo_min_max` run of this config performs on `problem`.
    pub fn expected_queries(&self, problem: &MinMaxProblem) -> u64 {
        let n = problem.oracle.sample_count();
        let per_iter = self.estimator_x.queries_per_call(n)
            + match self.y_mode {
                YMode::ZoPga => self.estimator_for_y().queries_per_call(n),
                YMode::FoPga => 0,
            };
        per_iter * self.iters as u64
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Minibatch estimate of `f(x, y)` (full objective for deterministic oracles).
    pub objective: f64,
    pub gap: Option<f64>,
    pub queries: u64,
    pub wall_ms: f64,
    /// Values of the problem's metric hooks, present on diagnostic records.
    pub metrics: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub solver: String,
    pub metric_names: Vec<String>,
    /// Record 0 is the starting point; record `t` follows iteration `t`.
    pub records: Vec<TraceRecord>,
}

impl SolverTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_x(&self) -> Option<&[f64]> {
        self.last().map(|r| r.x.as_slice())
    }

    pub fn final_y(&self) -> Option<&[f64]> {
        self.last().map(|r| r.y.as_slice())
    }

    pub fn metric_index(&self, name: &str) -> Option<usize> {
        self.metric_names.iter().position(|m| m == name)
    }

    /// Values of a metric on the records where it was evaluated, with iteration numbers.
    pub fn metric_series(&self, name: &str) -> Option<Vec<(usize, f64)>> {
        let k = self.metric_index(name)?;
        Some(
            self.records
                .iter()
                .filter_map(|r| r.metrics[k].map(|v| (r.iter, v)))
                .collect(),
        )
    }

    pub fn gap_series(&self) -> Vec<(usize, f64)> {
        self.records.iter().filter_map(|r| r.gap.map(|g| (r.iter, g))).collect()
    }
}

/// A solver failure. Runs aborted by an oracle failure keep their partial trace.
#[derive(Debug)]
pub struct SolveError {
    pub cause: Error,
    pub partial: Option<Box<SolverTrace>>,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.partial {
            Some(t) => write!(f, "{} (aborted after {} records)", self.cause, t.records.len()),
            None => write!(f, "{}", self.cause),
        }
    }
}

impl std::error::Error for SolveError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.cause)
    }
}

impl From<Error> for SolveError {
    fn from(cause: Error) -> Self {
        SolveError { cause, partial: None }
    }
}

pub type SolveResult = std::result::Result<SolverTrace, SolveError>;
