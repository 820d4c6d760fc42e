use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimators::zo_gradient;
use crate::oracle::{FnSide, QueryLedger, SideFunction, XSide, YSide};
use crate::projections::project;
use crate::rng::{draw_minibatch, RngStream};
use crate::vector::{check_dim, DecisionVector};

use super::{stationary_gap, MinMaxProblem, SolveError, SolveResult, SolverConfig, SolverTrace, TraceRecord, YMode};

/// Label of the diagnostics stream, kept apart from the algorithm's draws.
const DIAGNOSTIC_STREAM: u64 = 0xD1A6;

struct Recorder<'a> {
    problem: &'a MinMaxProblem,
    cfg: &'a SolverConfig,
    diag_rng: RngStream,
    started: Instant,
    trace: SolverTrace,
}

impl<'a> Recorder<'a> {
    fn new(solver: &str, problem: &'a MinMaxProblem, cfg: &'a SolverConfig, rng: &RngStream) -> Self {
        Recorder {
            problem,
            cfg,
            diag_rng: rng.derive(DIAGNOSTIC_STREAM),
            started: Instant::now(),
            trace: SolverTrace {
                solver: solver.to_string(),
                metric_names: problem.metric_names(),
                records: Vec::with_capacity(cfg.iters + 1),
            },
        }
    }

    fn minibatch_objective(&mut self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.problem.oracle.sample_count();
        let value = if n == 0 {
            self.problem.oracle.eval(x, y, &[])
        } else {
            let batch = draw_minibatch(n, self.cfg.estimator_x.b, &mut self.diag_rng)?;
            self.problem.oracle.eval(x, y, &batch)
        };
        crate::oracle::checked(value, || "while recording the trace objective".into())
    }

    fn record(&mut self, iter: usize, x: &[f64], y: &[f64], objective: f64, queries: u64) -> Result<()> {
        let diagnostic = iter.is_multiple_of(self.cfg.gap_every) || iter == self.cfg.iters;
        let (gap, metrics) = if diagnostic {
            let gap = stationary_gap(self.problem, x, y, self.cfg.alpha, self.cfg.beta)?;
            let metrics = self.problem.metrics.iter().map(|m| Some((m.f)(x, y))).collect();
            (Some(gap), metrics)
        } else {
            (None, vec![None; self.problem.metrics.len()])
        };
        let wall_ms = if self.cfg.wall_clock {
            self.started.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        self.trace.records.push(TraceRecord {
            iter,
            x: x.to_vec(),
            y: y.to_vec(),
            objective,
            gap,
            queries,
            wall_ms,
            metrics,
        });
        Ok(())
    }

    fn abort(self, cause: Error) -> SolveError {
        SolveError {
            cause,
            partial: Some(Box::new(self.trace)),
        }
    }
}

fn starting_point(problem: &MinMaxProblem, cfg: &SolverConfig) -> Result<(DecisionVector, DecisionVector)> {
    let x0 = match &cfg.x0 {
        Some(x) => {
            check_dim("x0", problem.dim_x(), x.len())?;
            project(&problem.x_set, x)?
        }
        None => problem.default_x0()?,
    };
    let y0 = match &cfg.y0 {
        Some(y) => {
            check_dim("y0", problem.dim_y(), y.len())?;
            project(&problem.y_set, y)?
        }
        None => problem.default_y0(),
    };
    Ok((x0, y0))
}

fn finite_gradient(g: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
        return Err(Error::OracleFailure {
            value: *bad,
            context: format!("in the analytic {what} gradient"),
        });
    }
    Ok(g)
}

fn descend(problem: &MinMaxProblem, x: &[f64], alpha: f64, g: &[f64]) -> Result<DecisionVector> {
    let stepped: Vec<f64> = x.iter().zip(g).map(|(a, gk)| a - alpha * gk).collect();
    project(&problem.x_set, &stepped)
}

fn ascend(problem: &MinMaxProblem, y: &[f64], beta: f64, g: &[f64]) -> Result<DecisionVector> {
    let stepped: Vec<f64> = y.iter().zip(g).map(|(a, gk)| a + beta * gk).collect();
    project(&problem.y_set, &stepped)
}

#[derive(Clone, Copy)]
enum Gradients {
    Zo(YMode),
    Fo,
}

fn alternating(solver: &str, problem: &MinMaxProblem, cfg: &SolverConfig, grads: Gradients) -> SolveResult {
    cfg.validate()?;
    match grads {
        Gradients::Fo => {
            if problem.grad_x.is_none() || problem.grad_y.is_none() {
                return Err(Error::Capability(format!(
                    "{solver} needs analytic gradients for both blocks of `{}`",
                    problem.name
                ))
                .into());
            }
        }
        Gradients::Zo(YMode::FoPga) if problem.grad_y.is_none() => {
            return Err(Error::Capability(format!(
                "one-sided mode needs an analytic y-gradient for `{}`",
                problem.name
            ))
            .into());
        }
        Gradients::Zo(_) => {}
    }
    let (mut x, mut y) = starting_point(problem, cfg)?;

    let mut rng = RngStream::new(cfg.seed);
    let ledger = QueryLedger::new();
    let mut rec = Recorder::new(solver, problem, cfg, &rng);
    let oracle = problem.oracle.as_ref();
    let est_y = cfg.estimator_for_y();

    let step = |x: &mut DecisionVector, y: &mut DecisionVector, rng: &mut RngStream| -> Result<()> {
        let gx = match grads {
            Gradients::Fo => finite_gradient((problem.grad_x.as_ref().unwrap())(x, y), "x")?,
            Gradients::Zo(_) => zo_gradient(&XSide { oracle, y }, x, &cfg.estimator_x, rng, &ledger)?.into_inner(),
        };
        *x = descend(problem, x, cfg.alpha, &gx)?;
        let gy = match grads {
            Gradients::Zo(YMode::ZoPga) => zo_gradient(&YSide { oracle, x }, y, &est_y, rng, &ledger)?.into_inner(),
            _ => finite_gradient((problem.grad_y.as_ref().unwrap())(x, y), "y")?,
        };
        *y = ascend(problem, y, cfg.beta, &gy)?;
        Ok(())
    };

    let init = rec
        .minibatch_objective(&x, &y)
        .and_then(|obj| rec.record(0, &x, &y, obj, 0));
    if let Err(e) = init {
        return Err(rec.abort(e));
    }
    for t in 1..=cfg.iters {
        let outcome = step(&mut x, &mut y, &mut rng)
            .and_then(|_| rec.minibatch_objective(&x, &y))
            .and_then(|obj| rec.record(t, &x, &y, obj, ledger.total()));
        if let Err(e) = outcome {
            return Err(rec.abort(e));
        }
    }
    Ok(rec.trace)
}

/// Alternating ZO projected descent on `x` and projected ascent on `y`.
///
/// Each iteration updates `x` from a ZO estimate at `(x, y)` and then `y`
/// at `(x_new, y)`, with a ZO estimate (`YMode::ZoPga`) or the analytic
/// gradient (`YMode::FoPga`). Deterministic given `cfg.seed`.
pub fn zo_min_max(problem: &MinMaxProblem, cfg: &SolverConfig) -> SolveResult {
    alternating("zo-min-max", problem, cfg, Gradients::Zo(cfg.y_mode))
}

/// The same loop with analytic gradients on both blocks; logs no queries.
pub fn fo_min_max(problem: &MinMaxProblem, cfg: &SolverConfig) -> SolveResult {
    alternating("fo-min-max", problem, cfg, Gradients::Fo)
}

/// Projected ZO descent on a single-block function of `x`, recording `y_of(x)` in the trace.
fn single_block<H, Y>(solver: &str, problem: &MinMaxProblem, cfg: &SolverConfig, h: &H, y_of: Y) -> SolveResult
where
    H: SideFunction,
    Y: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    let (mut x, _) = starting_point(problem, cfg)?;
    let mut rng = RngStream::new(cfg.seed);
    let ledger = QueryLedger::new();
    let mut rec = Recorder::new(solver, problem, cfg, &rng);

    let mut y = y_of(&x);
    let init = rec
        .minibatch_objective(&x, &y)
        .and_then(|obj| rec.record(0, &x, &y, obj, 0));
    if let Err(e) = init {
        return Err(rec.abort(e));
    }
    for t in 1..=cfg.iters {
        let outcome = zo_gradient(h, &x, &cfg.estimator_x, &mut rng, &ledger)
            .and_then(|g| descend(problem, &x, cfg.alpha, &g))
            .and_then(|next| {
                x = next;
                y = y_of(&x);
                rec.minibatch_objective(&x, &y)
            })
            .and_then(|obj| rec.record(t, &x, &y, obj, ledger.total()));
        if let Err(e) = outcome {
            return Err(rec.abort(e));
        }
    }
    Ok(rec.trace)
}

/// ZO projected descent on `h(x) = max_y f(x, y)` through the inner-max oracle.
///
/// Every evaluation of `h` counts as one query.
pub fn zo_pgd_reduced(problem: &MinMaxProblem, cfg: &SolverConfig) -> SolveResult {
    let inner = problem
        .inner_max
        .clone()
        .ok_or_else(|| Error::Capability(format!("zo-pgd needs an inner-max oracle for `{}`", problem.name)))?;
    let oracle = problem.oracle.as_ref();
    let inner_h = inner.clone();
    let h = FnSide::new(problem.dim_x(), oracle.sample_count(), move |x: &[f64], s: &[usize]| {
        oracle.eval(x, &inner_h(x), s)
    });
    single_block("zo-pgd", problem, cfg, &h, |x| inner(x))
}

/// ZO projected descent on the average of the problem's component losses.
///
/// The `y` recorded in the trace is the center of `Y` (uniform weights for a simplex).
pub fn zo_finite_sum(problem: &MinMaxProblem, cfg: &SolverConfig) -> SolveResult {
    let components = problem.components.clone().ok_or_else(|| {
        Error::Capability(format!(
            "zo-finite-sum needs per-component losses for `{}`",
            problem.name
        ))
    })?;
    let h = FnSide::new(problem.dim_x(), 0, move |x: &[f64], _: &[usize]| {
        let c = components(x);
        c.iter().sum::<f64>() / c.len() as f64
    });
    let center = problem.default_y0().into_inner();
    single_block("zo-finite-sum", problem, cfg, &h, |_| center.clone())
}
