//! Python bindings: projections, estimator helpers, the benchmark problems,
//! the four solvers and config-driven experiments.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use zominmax::estimators::{variance_bound as zo_variance_bound, EstimatorConfig, VarianceBoundParams};
use zominmax::harness::{parse_config, run_experiment as zo_run_experiment, run_solver, SolverKind, TrialStatus};
use zominmax::problems::{
    ensemble_problem, gen_synthetic_logreg, inner_max_weights as zo_inner_max_weights, poisoning_problem,
    quadratic_saddle, toy_polynomial, toy_regret as zo_toy_regret, EnsembleProblemSpec, PoisonProblemSpec,
    QuadraticSaddleSpec,
};
use zominmax::solvers::{self, MinMaxProblem, SolverConfig, SolverTrace, YMode};
use zominmax::Error;

fn to_py(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_y_mode(s: &str) -> PyResult<YMode> {
    match s {
        "zo-pga" => Ok(YMode::ZoPga),
        "fo-pga" => Ok(YMode::FoPga),
        _ => Err(PyValueError::new_err(format!(
            "y_mode must be zo-pga or fo-pga, got {s:?}"
        ))),
    }
}

fn parse_solver(s: &str) -> PyResult<SolverKind> {
    s.parse().map_err(|e: String| PyValueError::new_err(e))
}

/// Euclidean projection onto the box `[lo, hi]`.
#[pyfunction]
fn project_box(v: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(zominmax::project_box(&v, &lo, &hi).map_err(to_py)?.into_inner())
}

/// Euclidean projection onto the l2 ball of `radius` around `center`.
#[pyfunction]
fn project_l2_ball(v: Vec<f64>, center: Vec<f64>, radius: f64) -> PyResult<Vec<f64>> {
    Ok(zominmax::project_l2_ball(&v, &center, radius)
        .map_err(to_py)?
        .into_inner())
}

/// Euclidean projection onto the probability simplex.
#[pyfunction]
fn project_simplex(v: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(zominmax::project_simplex(&v).map_err(to_py)?.into_inner())
}

/// Second-moment bound of the averaged random gradient estimator.
#[pyfunction]
#[pyo3(signature = (lipschitz_grad, grad_norm_bound, dim, mu, q, b))]
fn variance_bound(lipschitz_grad: f64, grad_norm_bound: f64, dim: usize, mu: f64, q: usize, b: usize) -> PyResult<f64> {
    let params = VarianceBoundParams::new(lipschitz_grad, grad_norm_bound, dim).map_err(to_py)?;
    let cfg = EstimatorConfig::new(mu, q, b).map_err(to_py)?;
    Ok(zo_variance_bound(&params, &cfg))
}

/// Step sizes `(alpha, beta)` from the strong concavity and smoothness constants.
#[pyfunction]
fn theory_rates(gamma: f64, l_x: f64, l_y: f64) -> PyResult<(f64, f64)> {
    let r = solvers::theory_rates(gamma, l_x, l_y).map_err(to_py)?;
    Ok((r.alpha, r.beta))
}

/// Closed-form maximizer of the regularized weighted loss over the simplex.
#[pyfunction]
fn inner_max_weights(losses: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
    zo_inner_max_weights(&losses, lam).map_err(to_py)
}

/// Regret of `x` on the robust toy polynomial against the reference value -4.33.
#[pyfunction]
fn toy_regret(x: Vec<f64>) -> PyResult<f64> {
    zo_toy_regret(&x).map_err(to_py)
}

/// A constrained min-max problem `min_x max_y f(x, y)`.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: Arc<MinMaxProblem>,
}

#[pymethods]
impl PyProblem {
    /// Seeded strongly-convex strongly-concave quadratic with an interior saddle.
    #[staticmethod]
    #[pyo3(signature = (dim = 5, seed = 0))]
    fn quadratic(dim: usize, seed: u64) -> PyResult<Self> {
        let q = quadratic_saddle(&QuadraticSaddleSpec::testbed(dim, seed, None)).map_err(to_py)?;
        Ok(PyProblem {
            inner: Arc::new(q.problem),
        })
    }

    /// Robust sixth-degree polynomial in two variables.
    #[staticmethod]
    fn toy() -> Self {
        PyProblem {
            inner: Arc::new(toy_polynomial()),
        }
    }

    /// Universal perturbation against a synthetic ensemble of linear classifiers.
    #[staticmethod]
    #[pyo3(signature = (seed = 0, epsilon = 0.3, lam = 5.0))]
    fn ensemble(seed: u64, epsilon: f64, lam: f64) -> PyResult<Self> {
        let p = ensemble_problem(&EnsembleProblemSpec::synthetic(seed, epsilon, lam)).map_err(to_py)?;
        Ok(PyProblem { inner: Arc::new(p) })
    }

    /// Data poisoning of a synthetic logistic regression task.
    #[staticmethod]
    #[pyo3(signature = (n = 1000, d = 100, data_seed = 0, ratio = 0.15, epsilon = 2.0, lam = 1e-3, subset_seed = 0))]
    fn poisoning(
        n: usize,
        d: usize,
        data_seed: u64,
        ratio: f64,
        epsilon: f64,
        lam: f64,
        subset_seed: u64,
    ) -> PyResult<Self> {
        let data = Arc::new(gen_synthetic_logreg(n, d, data_seed).map_err(to_py)?);
        let p = poisoning_problem(&PoisonProblemSpec {
            data,
            ratio,
            epsilon,
            lambda: lam,
            subset_seed,
        })
        .map_err(to_py)?;
        Ok(PyProblem { inner: Arc::new(p) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim_x(&self) -> usize {
        self.inner.dim_x()
    }

    #[getter]
    fn dim_y(&self) -> usize {
        self.inner.dim_y()
    }

    #[getter]
    fn metric_names(&self) -> Vec<String> {
        self.inner.metric_names()
    }

    /// Full (expected) objective at `(x, y)`.
    fn evaluate(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim_x() || y.len() != self.inner.dim_y() {
            return Err(PyValueError::new_err(format!(
                "expected x of length {} and y of length {}, got {} and {}",
                self.inner.dim_x(),
                self.inner.dim_y(),
                x.len(),
                y.len()
            )));
        }
        Ok(self.inner.oracle.eval_full(&x, &y))
    }

    /// Norm of the proximal gradient mapping at `(x, y)`.
    fn stationary_gap(&self, x: Vec<f64>, y: Vec<f64>, alpha: f64, beta: f64) -> PyResult<f64> {
        solvers::stationary_gap(&self.inner, &x, &y, alpha, beta).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem({:?}, dim_x={}, dim_y={})",
            self.inner.name,
            self.inner.dim_x(),
            self.inner.dim_y()
        )
    }
}

/// Step sizes, iteration budget and estimator settings of one run.
#[pyclass(name = "SolverConfig", frozen)]
struct PySolverConfig {
    inner: SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (alpha, beta, iters, mu = 0.005, q = 1, b = 1, y_mode = "zo-pga", seed = 0, gap_every = 1,
                        x0 = None, y0 = None, mu_y = None, q_y = None, b_y = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: f64,
        beta: f64,
        iters: usize,
        mu: f64,
        q: usize,
        b: usize,
        y_mode: &str,
        seed: u64,
        gap_every: usize,
        x0: Option<Vec<f64>>,
        y0: Option<Vec<f64>>,
        mu_y: Option<f64>,
        q_y: Option<usize>,
        b_y: Option<usize>,
    ) -> PyResult<Self> {
        let est = EstimatorConfig::new(mu, q, b).map_err(to_py)?;
        let mut cfg = SolverConfig::new(alpha, beta, iters, est)
            .with_y_mode(parse_y_mode(y_mode)?)
            .with_seed(seed)
            .with_gap_every(gap_every);
        if mu_y.is_some() || q_y.is_some() || b_y.is_some() {
            let est_y = EstimatorConfig::new(mu_y.unwrap_or(mu), q_y.unwrap_or(q), b_y.unwrap_or(b)).map_err(to_py)?;
            cfg = cfg.with_estimator_y(est_y);
        }
        cfg.x0 = x0;
        cfg.y0 = y0;
        cfg.validate().map_err(to_py)?;
        Ok(PySolverConfig { inner: cfg })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn iters(&self) -> usize {
        self.inner.iters
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Oracle queries a zo-min-max run of this config performs on `problem`.
    fn expected_queries(&self, problem: &PyProblem) -> u64 {
        self.inner.expected_queries(&problem.inner)
    }
}

/// Per-iteration record of a solver run.
#[pyclass(name = "Trace", frozen)]
struct PyTrace {
    inner: SolverTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn solver(&self) -> String {
        self.inner.solver.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.records.len()
    }

    #[getter]
    fn iters(&self) -> Vec<usize> {
        self.inner.records.iter().map(|r| r.iter).collect()
    }

    #[getter]
    fn queries(&self) -> Vec<u64> {
        self.inner.records.iter().map(|r| r.queries).collect()
    }

    #[getter]
    fn objective(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.objective).collect()
    }

    /// Gap per record; `None` off the diagnostic cadence.
    #[getter]
    fn gap(&self) -> Vec<Option<f64>> {
        self.inner.records.iter().map(|r| r.gap).collect()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        self.inner.records.iter().map(|r| r.x.clone()).collect()
    }

    #[getter]
    fn y(&self) -> Vec<Vec<f64>> {
        self.inner.records.iter().map(|r| r.y.clone()).collect()
    }

    #[getter]
    fn final_x(&self) -> Option<Vec<f64>> {
        self.inner.final_x().map(<[f64]>::to_vec)
    }

    #[getter]
    fn final_y(&self) -> Option<Vec<f64>> {
        self.inner.final_y().map(<[f64]>::to_vec)
    }

    #[getter]
    fn metric_names(&self) -> Vec<String> {
        self.inner.metric_names.clone()
    }

    /// `(iter, value)` pairs of a problem metric where it was evaluated.
    fn metric(&self, name: &str) -> PyResult<Vec<(usize, f64)>> {
        self.inner
            .metric_series(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown metric {name:?}")))
    }

    /// Writes the trace as CSV.
    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        zominmax::harness::write_trace_csv(&self.inner, &path).map_err(to_py)
    }
}

/// Runs one of `zo-min-max`, `fo-min-max`, `zo-pgd`, `zo-finite-sum` on `problem`.
///
/// Raises `RuntimeError` when the oracle fails mid-run.
#[pyfunction]
#[pyo3(signature = (problem, config, solver = "zo-min-max"))]
fn solve(py: Python<'_>, problem: &PyProblem, config: &PySolverConfig, solver: &str) -> PyResult<PyTrace> {
    let kind = parse_solver(solver)?;
    let p = problem.inner.clone();
    let cfg = config.inner.clone();
    let trace = py
        .detach(move || run_solver(kind, &p, &cfg))
        .map_err(|e| to_py(e.cause))?;
    Ok(PyTrace { inner: trace })
}

/// Runs a key=value experiment config; returns a dict with per-trial and mean values.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let cfg = parse_config(&path).map_err(to_py)?;
    let summary = py.detach(|| zo_run_experiment(&cfg)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("problem", &summary.problem)?;
    out.set_item("solver", &summary.solver)?;
    out.set_item("output", cfg.output.display().to_string())?;
    out.set_item("total_queries", summary.total_queries)?;
    let mean = PyDict::new(py);
    for (name, v) in summary.columns.iter().zip(&summary.mean) {
        mean.set_item(name, *v)?;
    }
    out.set_item("mean", mean)?;
    let trials: Vec<Bound<'py, PyDict>> = summary
        .trials
        .iter()
        .map(|t| {
            let d = PyDict::new(py);
            d.set_item("seed", t.seed)?;
            d.set_item("ok", t.status == TrialStatus::Ok)?;
            d.set_item("queries", t.queries)?;
            d.set_item("trace", t.trace_path.display().to_string())?;
            for (name, v) in summary.columns.iter().zip(&t.values) {
                d.set_item(name, *v)?;
            }
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    out.set_item("trials", trials)?;
    Ok(out)
}

#[pymodule]
fn pyzominmax(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(project_box, m)?)?;
    m.add_function(wrap_pyfunction!(project_l2_ball, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(variance_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theory_rates, m)?)?;
    m.add_function(wrap_pyfunction!(inner_max_weights, m)?)?;
    m.add_function(wrap_pyfunction!(toy_regret, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyTrace>()?;
    Ok(())
}
