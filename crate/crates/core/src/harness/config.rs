//! Flat `key = value` experiment configuration.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::EstimatorConfig;
use crate::solvers::{SolverConfig, YMode};

/// Overrides the `output` key when set.
pub const OUTPUT_DIR_ENV: &str = "ZOMINMAX_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Quadratic,
    Toy,
    Poison,
    Ensemble,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Quadratic => "quadratic",
            ProblemKind::Toy => "toy",
            ProblemKind::Poison => "poison",
            ProblemKind::Ensemble => "ensemble",
        }
    }

    /// Whether the problem exposes an analytic gradient in `x`.
    pub fn has_grad_x(self) -> bool {
        !matches!(self, ProblemKind::Ensemble)
    }

    pub fn has_inner_max(self) -> bool {
        matches!(self, ProblemKind::Ensemble)
    }

    pub fn has_components(self) -> bool {
        matches!(self, ProblemKind::Ensemble)
    }
}

impl FromStr for ProblemKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quadratic" => Ok(ProblemKind::Quadratic),
            "toy" => Ok(ProblemKind::Toy),
            "poison" => Ok(ProblemKind::Poison),
            "ensemble" => Ok(ProblemKind::Ensemble),
            _ => Err("expected one of quadratic, toy, poison, ensemble".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    ZoMinMax,
    FoMinMax,
    ZoPgd,
    ZoFiniteSum,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::ZoMinMax => "zo-min-max",
            SolverKind::FoMinMax => "fo-min-max",
            SolverKind::ZoPgd => "zo-pgd",
            SolverKind::ZoFiniteSum => "zo-finite-sum",
        }
    }
}

impl FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zo-min-max" => Ok(SolverKind::ZoMinMax),
            "fo-min-max" => Ok(SolverKind::FoMinMax),
            "zo-pgd" => Ok(SolverKind::ZoPgd),
            "zo-finite-sum" => Ok(SolverKind::ZoFiniteSum),
            _ => Err("expected one of zo-min-max, fo-min-max, zo-pgd, zo-finite-sum".into()),
        }
    }
}

/// Problem parameters; only the fields of the selected problem are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    /// Quadratic: dimension of each block.
    pub dim: usize,
    /// Quadratic and ensemble instance seed.
    pub problem_seed: u64,
    /// Quadratic: number of zero-mean shift samples (0 = deterministic).
    pub noise_samples: usize,
    pub noise_scale: f64,
    /// Poison: dataset size, feature dimension and seed, or a CSV to load instead.
    pub n: usize,
    pub d: usize,
    pub data_seed: u64,
    pub data_file: Option<PathBuf>,
    pub ratio: f64,
    pub subset_seed: u64,
    /// Poison and ensemble.
    pub epsilon: f64,
    pub lambda: f64,
}

impl ProblemParams {
    fn defaults(kind: ProblemKind) -> Self {
        let (epsilon, lambda) = match kind {
            ProblemKind::Ensemble => (0.3, 5.0),
            _ => (2.0, 1e-3),
        };
        ProblemParams {
            dim: 5,
            problem_seed: 0,
            noise_samples: 0,
            noise_scale: 0.0,
            n: 1000,
            d: 100,
            data_seed: 0,
            data_file: None,
            ratio: 0.15,
            subset_seed: 0,
            epsilon,
            lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub params: ProblemParams,
    pub solver: SolverKind,
    pub solver_cfg: SolverConfig,
    /// Replace `alpha`/`beta` by the theory step sizes from the problem's constants (quadratic only).
    pub theory_rates: bool,
    pub trials: usize,
    pub output: PathBuf,
}

type Applies = &'static [ProblemKind];
const ALL: Applies = &[
    ProblemKind::Quadratic,
    ProblemKind::Toy,
    ProblemKind::Poison,
    ProblemKind::Ensemble,
];
const QUAD: Applies = &[ProblemKind::Quadratic];
const POISON: Applies = &[ProblemKind::Poison];
const EPS_LAMBDA: Applies = &[ProblemKind::Poison, ProblemKind::Ensemble];
const SEEDED: Applies = &[ProblemKind::Quadratic, ProblemKind::Ensemble];

/// Every accepted key, with the problems it applies to and a one-line description.
pub const KEYS: &[(&str, Applies, &str)] = &[
    ("problem", ALL, "quadratic | toy | poison | ensemble (required)"),
    (
        "solver",
        ALL,
        "zo-min-max | fo-min-max | zo-pgd | zo-finite-sum (required)",
    ),
    ("alpha", ALL, "x step size (required unless theory_rates = true)"),
    ("beta", ALL, "y step size (required unless theory_rates = true)"),
    (
        "theory_rates",
        QUAD,
        "true to derive alpha and beta from the problem constants",
    ),
    ("iters", ALL, "number of iterations T (required)"),
    ("seed", ALL, "base seed; trial k uses seed + k (required)"),
    ("trials", ALL, "independent trials (default 1)"),
    ("gap_every", ALL, "diagnostic cadence in iterations (default 1)"),
    ("y_mode", ALL, "zo-pga | fo-pga (default zo-pga)"),
    ("mu", ALL, "smoothing radius of the x estimator (default 0.005)"),
    ("q", ALL, "random directions of the x estimator (default 1)"),
    ("b", ALL, "minibatch size of the x estimator (default 1)"),
    ("mu_y", ALL, "smoothing radius of the y estimator (default: mu)"),
    ("q_y", ALL, "random directions of the y estimator (default: q)"),
    ("b_y", ALL, "minibatch size of the y estimator (default: b)"),
    ("x0", ALL, "comma-separated initial x (default: projection of 0)"),
    ("y0", ALL, "comma-separated initial y (default: center of Y)"),
    (
        "wall_clock",
        ALL,
        "true to record wall-clock milliseconds (default false)",
    ),
    ("output", ALL, "output directory (default: out/<config file stem>)"),
    ("dim", QUAD, "block dimension of the quadratic testbed (default 5)"),
    ("problem_seed", SEEDED, "seed of the problem instance (default 0)"),
    (
        "noise_samples",
        QUAD,
        "number of zero-mean shift samples, 0 = deterministic (default 0)",
    ),
    ("noise_scale", QUAD, "standard deviation of the shifts (default 0)"),
    ("n", POISON, "dataset size (default 1000)"),
    ("d", POISON, "feature dimension (default 100)"),
    ("data_seed", POISON, "dataset seed (default 0)"),
    ("data_file", POISON, "CSV dataset to load instead of generating one"),
    ("ratio", POISON, "fraction of poisoned training rows (default 0.15)"),
    ("subset_seed", POISON, "seed picking the poisoned rows (default 0)"),
    (
        "epsilon",
        EPS_LAMBDA,
        "l-infinity bound on x (default 2 for poison, 0.3 for ensemble)",
    ),
    (
        "lambda",
        EPS_LAMBDA,
        "regularizer (default 1e-3 for poison, 5 for ensemble)",
    ),
];

struct Entry {
    line: usize,
    value: String,
}

struct Entries {
    map: HashMap<String, Entry>,
}

impl Entries {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.map.get(key).map_or(0, |e| e.line),
            key: key.into(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|e| e.value.as_str())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.err(key, format!("cannot parse {v:?}: {e}"))),
        }
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| self.err(key, "missing required key"))
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = match default {
            Some(d) => self.parse::<f64>(key)?.unwrap_or(d),
            None => self.required::<f64>(key)?,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.err(key, format!("must be a positive number, got {v}")));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.parse::<usize>(key)?.unwrap_or(default);
        if v == 0 {
            return Err(self.err(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(raw) = self.raw(key) else { return Ok(None) };
        raw.split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(key, format!("bad vector entry {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

/// Reads and validates a config file. See [`KEYS`] for the accepted keys.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: format!("cannot read config: {e}"),
    })?;
    let stem = path
        .file_stem()
        .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, &stem, base)
}

/// Parses config text. `stem` names the default output directory; relative paths
/// inside the config resolve against `base`.
pub fn parse_config_str(text: &str, stem: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut map: HashMap<String, Entry> = HashMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: content.to_string(),
            message: "expected key = value".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.iter().any(|(name, _, _)| *name == key) {
            return Err(Error::Config {
                line,
                key: key.into(),
                message: "unknown key".into(),
            });
        }
        if let Some(prev) = map.get(key) {
            return Err(Error::Config {
                line,
                key: key.into(),
                message: format!("duplicate key (first set on line {})", prev.line),
            });
        }
        map.insert(
            key.into(),
            Entry {
                line,
                value: value.into(),
            },
        );
    }
    let e = Entries { map };

    let problem: ProblemKind = e.required("problem")?;
    let solver: SolverKind = e.required("solver")?;
    for (key, entry) in &e.map {
        let (_, applies, _) = KEYS.iter().find(|(name, _, _)| name == key).expect("checked above");
        if !applies.contains(&problem) {
            return Err(Error::Config {
                line: entry.line,
                key: key.clone(),
                message: format!("does not apply to problem {}", problem.name()),
            });
        }
    }

    let flag = |key: &str| match e.raw(key) {
        None => Ok(false),
        Some(v) => parse_bool(v).map_err(|m| e.err(key, m)),
    };
    let theory_rates = flag("theory_rates")?;
    let (alpha, beta) = if theory_rates {
        for key in ["alpha", "beta"] {
            if e.raw(key).is_some() {
                return Err(e.err(key, "cannot be combined with theory_rates = true"));
            }
        }
        (f64::NAN, f64::NAN)
    } else {
        (e.positive("alpha", None)?, e.positive("beta", None)?)
    };
    let iters = e.required::<usize>("iters")?;
    if iters == 0 {
        return Err(e.err("iters", "must be at least 1"));
    }
    let seed = e.required::<u64>("seed")?;
    let trials = e.count("trials", 1)?;
    let gap_every = e.count("gap_every", 1)?;
    let y_mode = match e.raw("y_mode") {
        None | Some("zo-pga") => YMode::ZoPga,
        Some("fo-pga") => YMode::FoPga,
        Some(other) => return Err(e.err("y_mode", format!("expected zo-pga or fo-pga, got {other:?}"))),
    };
    let mu = e.positive("mu", Some(5e-3))?;
    let q = e.count("q", 1)?;
    let b = e.count("b", 1)?;
    let est_x = EstimatorConfig::new(mu, q, b).map_err(|err| e.err("mu", err.to_string()))?;
    let has_y_est = ["mu_y", "q_y", "b_y"].iter().any(|k| e.raw(k).is_some());
    let est_y = if has_y_est {
        let y = EstimatorConfig::new(e.positive("mu_y", Some(mu))?, e.count("q_y", q)?, e.count("b_y", b)?)
            .map_err(|err| e.err("mu_y", err.to_string()))?;
        Some(y)
    } else {
        None
    };
    let wall_clock = flag("wall_clock")?;

    let mut params = ProblemParams::defaults(problem);
    params.dim = e.count("dim", params.dim)?;
    params.problem_seed = e.parse("problem_seed")?.unwrap_or(params.problem_seed);
    params.noise_samples = e.parse("noise_samples")?.unwrap_or(params.noise_samples);
    params.noise_scale = e.parse("noise_scale")?.unwrap_or(params.noise_scale);
    if !(params.noise_scale >= 0.0 && params.noise_scale.is_finite()) {
        return Err(e.err("noise_scale", "must be nonnegative"));
    }
    params.n = e.parse("n")?.unwrap_or(params.n);
    if params.n < 10 {
        return Err(e.err("n", "must be at least 10"));
    }
    params.d = e.count("d", params.d)?;
    params.data_seed = e.parse("data_seed")?.unwrap_or(params.data_seed);
    params.data_file = e.raw("data_file").map(|f| base.join(f));
    params.ratio = e.parse("ratio")?.unwrap_or(params.ratio);
    if !(params.ratio > 0.0 && params.ratio <= 1.0) {
        return Err(e.err("ratio", format!("must lie in (0, 1], got {}", params.ratio)));
    }
    params.subset_seed = e.parse("subset_seed")?.unwrap_or(params.subset_seed);
    params.epsilon = e.positive("epsilon", Some(params.epsilon))?;
    params.lambda = e.positive("lambda", Some(params.lambda))?;

    // Capability checks that do not need the problem instance.
    match solver {
        SolverKind::FoMinMax if !problem.has_grad_x() => {
            return Err(e.err(
                "solver",
                format!(
                    "fo-min-max needs analytic gradients but {} is oracle-only in x",
                    problem.name()
                ),
            ))
        }
        SolverKind::ZoPgd if !problem.has_inner_max() => {
            return Err(e.err(
                "solver",
                format!("zo-pgd needs an inner-max oracle, which {} lacks", problem.name()),
            ))
        }
        SolverKind::ZoFiniteSum if !problem.has_components() => {
            return Err(e.err(
                "solver",
                format!(
                    "zo-finite-sum needs per-component losses, which {} lacks",
                    problem.name()
                ),
            ))
        }
        _ => {}
    }

    let output = match (std::env::var_os(OUTPUT_DIR_ENV), e.raw("output")) {
        (Some(dir), _) => PathBuf::from(dir),
        (None, Some(dir)) => base.join(dir),
        (None, None) => PathBuf::from("out").join(stem),
    };

    let mut solver_cfg = SolverConfig::new(alpha, beta, iters, est_x)
        .with_y_mode(y_mode)
        .with_seed(seed)
        .with_gap_every(gap_every);
    solver_cfg.estimator_y = est_y;
    solver_cfg.wall_clock = wall_clock;
    solver_cfg.x0 = e.vector("x0")?;
    solver_cfg.y0 = e.vector("y0")?;

    Ok(ExperimentConfig {
        problem,
        params,
        solver,
        solver_cfg,
        theory_rates,
        trials,
        output,
    })
}
