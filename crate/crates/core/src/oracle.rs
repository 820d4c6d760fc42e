//! Objective oracles and query accounting.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A stochastic objective `f(x, y; xi)`.
///
/// `eval` returns the average of the per-sample objective over the given
/// sample indices. An empty index set, or any index set when
/// `sample_count() == 0`, yields the deterministic (expected) objective.
/// Implementations must be deterministic in their arguments.
pub trait StochasticOracle: Send + Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    /// Number of stochastic samples; `0` means the objective is deterministic.
    fn sample_count(&self) -> usize;
    fn eval(&self, x: &[f64], y: &[f64], samples: &[usize]) -> f64;

    /// The full expected objective.
    fn eval_full(&self, x: &[f64], y: &[f64]) -> f64 {
        let all: Vec<usize> = (0..self.sample_count()).collect();
        self.eval(x, y, &all)
    }
}

type EvalFn = dyn Fn(&[f64], &[f64], &[usize]) -> f64 + Send + Sync;

/// Oracle built from a closure.
#[derive(Clone)]
pub struct FnOracle {
    dim_x: usize,
    dim_y: usize,
    samples: usize,
    f: Arc<EvalFn>,
}

impl FnOracle {
    pub fn new<F>(dim_x: usize, dim_y: usize, samples: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64], &[usize]) -> f64 + Send + Sync + 'static,
    {
        FnOracle {
            dim_x,
            dim_y,
            samples,
            f: Arc::new(f),
        }
    }

    /// A deterministic objective `f(x, y)`.
    pub fn deterministic<F>(dim_x: usize, dim_y: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(dim_x, dim_y, 0, move |x, y, _| f(x, y))
    }
}

impl StochasticOracle for FnOracle {
    fn dim_x(&self) -> usize {
        self.dim_x
    }
    fn dim_y(&self) -> usize {
        self.dim_y
    }
    fn sample_count(&self) -> usize {
        self.samples
    }
    fn eval(&self, x: &[f64], y: &[f64], samples: &[usize]) -> f64 {
        (self.f)(x, y, samples)
    }
}

/// Counts oracle evaluations. Updates are atomic; the count never decreases.
#[derive(Debug, Default)]
pub struct QueryLedger {
    total: AtomicU64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, n: u64) {
        self.total.fetch_add(n, Ordering::Relaxed);
    }

    pub fn total(&self) -> u64 {
        self.total.load(Ordering::Relaxed)
    }
}

/// A function of one block of variables, the other block held fixed.
pub trait SideFunction {
    fn dim(&self) -> usize;
    fn sample_count(&self) -> usize;
    fn eval(&self, point: &[f64], samples: &[usize]) -> f64;
}

/// `x -> f(x, y)` for a fixed `y`.
pub struct XSide<'a, O: ?Sized> {
    pub oracle: &'a O,
    pub y: &'a [f64],
}

impl<O: StochasticOracle + ?Sized> SideFunction for XSide<'_, O> {
    fn dim(&self) -> usize {
        self.oracle.dim_x()
    }
    fn sample_count(&self) -> usize {
        self.oracle.sample_count()
    }
    fn eval(&self, point: &[f64], samples: &[usize]) -> f64 {
        self.oracle.eval(point, self.y, samples)
    }
}

/// `y -> f(x, y)` for a fixed `x`.
pub struct YSide<'a, O: ?Sized> {
    pub oracle: &'a O,
    pub x: &'a [f64],
}

impl<O: StochasticOracle + ?Sized> SideFunction for YSide<'_, O> {
    fn dim(&self) -> usize {
        self.oracle.dim_y()
    }
    fn sample_count(&self) -> usize {
        self.oracle.sample_count()
    }
    fn eval(&self, point: &[f64], samples: &[usize]) -> f64 {
        self.oracle.eval(self.x, point, samples)
    }
}

/// A single-block function from a closure; used for reduced problems and tests.
pub struct FnSide<F> {
    dim: usize,
    samples: usize,
    f: F,
}

impl<F: Fn(&[f64], &[usize]) -> f64> FnSide<F> {
    pub fn new(dim: usize, samples: usize, f: F) -> Self {
        FnSide { dim, samples, f }
    }
}

impl<F: Fn(&[f64], &[usize]) -> f64> SideFunction for FnSide<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn sample_count(&self) -> usize {
        self.samples
    }
    fn eval(&self, point: &[f64], samples: &[usize]) -> f64 {
        (self.f)(point, samples)
    }
}

pub(crate) fn checked(value: f64, context: impl FnOnce() -> String) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::OracleFailure {
            value,
            context: context(),
        })
    }
}
