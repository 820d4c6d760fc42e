//! Running configured experiments and summarizing trials.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ProblemKind, SolverKind};
use super::trace_io::{write_table, TraceTable};
use crate::error::{Error, Result};
use crate::problems::{
    ensemble_problem, gen_synthetic_logreg, poisoning_problem, quadratic_saddle, toy_polynomial, EnsembleProblemSpec,
    PoisonProblemSpec, QuadraticSaddleSpec, ShiftNoise, SyntheticLogRegData,
};
use crate::solvers::{
    fo_min_max, theory_rates, zo_finite_sum, zo_min_max, zo_pgd_reduced, MinMaxProblem, SolveResult, SolverConfig,
};

/// Builds the configured problem and returns it with the solver config to use
/// (theory step sizes substituted when requested).
pub fn build_problem(cfg: &ExperimentConfig) -> Result<(MinMaxProblem, SolverConfig)> {
    let p = &cfg.params;
    let mut solver_cfg = cfg.solver_cfg.clone();
    if cfg.theory_rates && cfg.problem != ProblemKind::Quadratic {
        return Err(Error::Invalid("theory_rates needs known problem constants".into()));
    }
    let problem = match cfg.problem {
        ProblemKind::Quadratic => {
            let noise = (p.noise_samples > 0).then(|| ShiftNoise {
                samples: p.noise_samples,
                scale: p.noise_scale,
                seed: p.problem_seed.wrapping_add(1),
            });
            let q = quadratic_saddle(&QuadraticSaddleSpec::testbed(p.dim, p.problem_seed, noise))?;
            if cfg.theory_rates {
                let r = theory_rates(q.gamma, q.l_x, q.l_y)?;
                solver_cfg.alpha = r.alpha;
                solver_cfg.beta = r.beta;
            }
            q.problem
        }
        ProblemKind::Toy => toy_polynomial(),
        ProblemKind::Poison => {
            let data = match &p.data_file {
                Some(path) => SyntheticLogRegData::read_csv(path)?,
                None => gen_synthetic_logreg(p.n, p.d, p.data_seed)?,
            };
            poisoning_problem(&PoisonProblemSpec {
                data: Arc::new(data),
                ratio: p.ratio,
                epsilon: p.epsilon,
                lambda: p.lambda,
                subset_seed: p.subset_seed,
            })?
        }
        ProblemKind::Ensemble => {
            ensemble_problem(&EnsembleProblemSpec::synthetic(p.problem_seed, p.epsilon, p.lambda))?
        }
    };
    solver_cfg.validate()?;
    Ok((problem, solver_cfg))
}

pub fn run_solver(kind: SolverKind, problem: &MinMaxProblem, cfg: &SolverConfig) -> SolveResult {
    match kind {
        SolverKind::ZoMinMax => zo_min_max(problem, cfg),
        SolverKind::FoMinMax => fo_min_max(problem, cfg),
        SolverKind::ZoPgd => zo_pgd_reduced(problem, cfg),
        SolverKind::ZoFiniteSum => zo_finite_sum(problem, cfg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    pub queries: u64,
    pub wall_ms: f64,
    pub trace_path: PathBuf,
    /// Aligned with [`RunSummary::columns`].
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub problem: String,
    pub solver: String,
    /// `final_objective`, `final_gap`, then `final_<m>` and `min_<m>` per metric.
    pub columns: Vec<String>,
    pub trials: Vec<TrialSummary>,
    /// Mean over successful trials, per column.
    pub mean: Vec<Option<f64>>,
    /// Sample standard deviation over successful trials (needs two values).
    pub std: Vec<Option<f64>>,
    pub total_queries: u64,
    pub wall_ms: f64,
}

impl RunSummary {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn mean_of(&self, name: &str) -> Option<f64> {
        self.mean[self.column_index(name)?]
    }

    pub fn succeeded(&self) -> usize {
        self.trials.iter().filter(|t| t.status == TrialStatus::Ok).count()
    }
}

/// Summary column names for a trace table.
pub fn summary_columns(table: &TraceTable) -> Vec<String> {
    let metrics = &table.columns[5..];
    let mut cols = vec!["final_objective".to_string(), "final_gap".to_string()];
    cols.extend(metrics.iter().map(|m| format!("final_{m}")));
    cols.extend(metrics.iter().map(|m| format!("min_{m}")));
    cols
}

/// Per-trial summary values computed from a trace table; also used to check
/// summaries against trace files on disk.
pub fn summary_values(table: &TraceTable) -> Vec<Option<f64>> {
    let last = |k: usize| table.rows.iter().rev().find_map(|r| r[k]);
    let min = |k: usize| {
        table
            .rows
            .iter()
            .filter_map(|r| r[k])
            .filter(|v| !v.is_nan())
            .reduce(f64::min)
    };
    let metric_cols = 5..table.columns.len();
    let mut values = vec![last(3), last(4)];
    values.extend(metric_cols.clone().map(last));
    values.extend(metric_cols.map(min));
    values
}

/// Mean and sample standard deviation per column over the given rows.
pub fn column_stats(rows: &[&[Option<f64>]], width: usize) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let mut mean = Vec::with_capacity(width);
    let mut std = Vec::with_capacity(width);
    for k in 0..width {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r.get(k).copied().flatten()).collect();
        if vals.is_empty() {
            mean.push(None);
            std.push(None);
            continue;
        }
        let n = vals.len() as f64;
        let m = vals.iter().sum::<f64>() / n;
        mean.push(Some(m));
        std.push((vals.len() > 1).then(|| (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()));
    }
    (mean, std)
}

fn trace_file(dir: &Path, trial: usize) -> PathBuf {
    dir.join(format!("trace_{trial}.csv"))
}

/// Runs `cfg.trials` independent trials with seeds `seed, seed + 1, ...` (in parallel),
/// writes `trace_<k>.csv` per trial and `summary.csv`, and returns the summary.
///
/// A trial that aborts is marked failed; its partial trace is still written.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let (problem, solver_cfg) = build_problem(cfg)?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| Error::io(&cfg.output, e))?;

    let outcomes: Vec<Result<(TrialSummary, Option<Vec<String>>)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let seed = solver_cfg.seed.wrapping_add(k as u64);
            let trial_cfg = solver_cfg.clone().with_seed(seed);
            let t0 = Instant::now();
            let (trace, status) = match run_solver(cfg.solver, &problem, &trial_cfg) {
                Ok(trace) => (Some(trace), TrialStatus::Ok),
                Err(e) => (e.partial.map(|t| *t), TrialStatus::Failed(e.cause.to_string())),
            };
            let path = trace_file(&cfg.output, k);
            let (values, queries, columns) = match &trace {
                Some(trace) => {
                    let table = TraceTable::from_trace(trace);
                    write_table(&table, &path)?;
                    let queries = trace.last().map_or(0, |r| r.queries);
                    let values = if status == TrialStatus::Ok {
                        summary_values(&table)
                    } else {
                        Vec::new()
                    };
                    (values, queries, Some(summary_columns(&table)))
                }
                None => (Vec::new(), 0, None),
            };
            Ok((
                TrialSummary {
                    trial: k,
                    seed,
                    status,
                    queries,
                    wall_ms: t0.elapsed().as_secs_f64() * 1e3,
                    trace_path: path,
                    values,
                },
                columns,
            ))
        })
        .collect();

    let mut trials = Vec::with_capacity(cfg.trials);
    let mut columns = None;
    for outcome in outcomes {
        let (trial, cols) = outcome?;
        if columns.is_none() {
            columns = cols;
        }
        trials.push(trial);
    }
    let columns = columns.unwrap_or_else(|| {
        let mut c = vec!["final_objective".to_string(), "final_gap".to_string()];
        for m in problem.metric_names() {
            c.push(format!("final_{m}"));
        }
        for m in problem.metric_names() {
            c.push(format!("min_{m}"));
        }
        c
    });
    for t in &mut trials {
        if t.values.is_empty() {
            t.values = vec![None; columns.len()];
        }
    }
    let ok_rows: Vec<&[Option<f64>]> = trials
        .iter()
        .filter(|t| t.status == TrialStatus::Ok)
        .map(|t| t.values.as_slice())
        .collect();
    let (mean, std) = column_stats(&ok_rows, columns.len());
    let summary = RunSummary {
        problem: cfg.problem.name().into(),
        solver: cfg.solver.name().into(),
        columns,
        total_queries: trials.iter().map(|t| t.queries).sum(),
        trials,
        mean,
        std,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_summary(&summary, &cfg.output.join("summary.csv"))?;
    Ok(summary)
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.16e}"))
}

/// Writes `trial,seed,status,queries,wall_ms,<columns...>` with one row per trial
/// followed by `mean` and `std` rows.
pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<()> {
    let mut out = String::from("trial,seed,status,queries,wall_ms");
    for c in &summary.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for t in &summary.trials {
        let status = match &t.status {
            TrialStatus::Ok => "ok".to_string(),
            TrialStatus::Failed(msg) => format!("\"failed: {}\"", msg.replace('"', "'")),
        };
        let _ = write!(out, "{},{},{},{},{:.3}", t.trial, t.seed, status, t.queries, t.wall_ms);
        for v in &t.values {
            out.push(',');
            out.push_str(&fmt_cell(*v));
        }
        out.push('\n');
    }
    for (label, row) in [("mean", &summary.mean), ("std", &summary.std)] {
        let _ = write!(out, "{label},,,,");
        for v in row {
            out.push(',');
            out.push_str(&fmt_cell(*v));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
