//! Universal perturbation against an ensemble of linear classifiers, with
//! importance weights over (image group, model) pairs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::StochasticOracle;
use crate::projections::{project_simplex, ConstraintSet};
use crate::rng::RngStream;
use crate::solvers::MinMaxProblem;
use crate::vector::dot;

/// A multiclass linear scorer `g(z) = W z + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// One row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn classes(&self) -> usize {
        self.weights.len()
    }

    pub fn scores(&self, z: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, c)| dot(w, z) + c)
            .collect()
    }

    /// Hinge on the margin between class `label` and the best other class.
    pub fn cw_loss(&self, z: &[f64], label: usize) -> f64 {
        let s = self.scores(z);
        let other = s
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != label)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        (s[label] - other).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleProblemSpec {
    pub models: Vec<LinearModel>,
    /// `groups[i]` holds feature vectors whose true class is `i`.
    pub groups: Vec<Vec<Vec<f64>>>,
    /// l-infinity bound on the perturbation.
    pub epsilon: f64,
    pub lambda: f64,
}

impl EnsembleProblemSpec {
    /// Two random 3-class linear models in 10 dimensions (weights `N(0, 4)`, small biases)
    /// and two groups of 20 points drawn around class means that both models score correctly.
    pub fn synthetic(seed: u64, epsilon: f64, lambda: f64) -> Self {
        const DIM: usize = 10;
        const CLASSES: usize = 3;
        const GROUPS: usize = 2;
        const PER_GROUP: usize = 20;
        const MEAN_NORM: f64 = 1.0;
        const WEIGHT_SCALE: f64 = 2.0;
        let mut rng = RngStream::new(seed);
        let models: Vec<LinearModel> = (0..2)
            .map(|_| LinearModel {
                weights: (0..CLASSES)
                    .map(|_| (0..DIM).map(|_| WEIGHT_SCALE * rng.standard_normal()).collect())
                    .collect(),
                bias: (0..CLASSES).map(|_| 0.3 * rng.standard_normal()).collect(),
            })
            .collect();
        let groups = (0..GROUPS)
            .map(|i| {
                // Sum over models of the unit direction that favours class i.
                let mut dir = vec![0.0; DIM];
                for m in &models {
                    let mut dj = vec![0.0; DIM];
                    for k in 0..CLASSES {
                        let sign = if k == i { 1.0 } else { -1.0 / (CLASSES - 1) as f64 };
                        dj.iter_mut().zip(&m.weights[k]).for_each(|(d, w)| *d += sign * w);
                    }
                    let n = dot(&dj, &dj).sqrt();
                    dir.iter_mut().zip(&dj).for_each(|(d, v)| *d += v / n);
                }
                let n = dot(&dir, &dir).sqrt();
                let mean: Vec<f64> = dir.iter().map(|d| MEAN_NORM * d / n).collect();
                (0..PER_GROUP)
                    .map(|_| mean.iter().map(|m| m + 0.3 * rng.standard_normal()).collect())
                    .collect()
            })
            .collect();
        EnsembleProblemSpec {
            models,
            groups,
            epsilon,
            lambda,
        }
    }

    pub fn pairs(&self) -> usize {
        self.groups.len() * self.models.len()
    }

    fn validate(&self) -> Result<usize> {
        if self.models.is_empty() || self.groups.is_empty() {
            return Err(Error::Invalid("need at least one model and one group".into()));
        }
        if let Some(i) = self.groups.iter().position(|g| g.is_empty()) {
            return Err(Error::Invalid(format!("group {i} is empty")));
        }
        let dim = self.groups[0][0].len();
        if dim == 0 {
            return Err(Error::InvalidDimension("feature dimension must be positive".into()));
        }
        if self.groups.iter().flatten().any(|z| z.len() != dim) {
            return Err(Error::InvalidDimension("feature vectors differ in length".into()));
        }
        for (j, m) in self.models.iter().enumerate() {
            if m.classes() < self.groups.len() || m.classes() < 2 {
                return Err(Error::Invalid(format!(
                    "model {j} scores {} classes but there are {} groups",
                    m.classes(),
                    self.groups.len()
                )));
            }
            if m.bias.len() != m.classes() || m.weights.iter().any(|w| w.len() != dim) {
                return Err(Error::InvalidDimension(format!(
                    "model {j} does not match the feature dimension"
                )));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Invalid(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(dim)
    }
}

/// Per-pair losses `F_ij(x)`, ordered group-major (`i * J + j`).
pub fn pair_losses(spec: &EnsembleProblemSpec, x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.pairs());
    let mut shifted = vec![0.0; x.len()];
    for (i, group) in spec.groups.iter().enumerate() {
        for m in &spec.models {
            let total: f64 = group
                .iter()
                .map(|z| {
                    shifted
                        .iter_mut()
                        .zip(z.iter().zip(x))
                        .for_each(|(s, (a, b))| *s = a + b);
                    m.cw_loss(&shifted, i)
                })
                .sum();
            out.push(total / group.len() as f64);
        }
    }
    out
}

/// Weighted objective `sum w_k F_k - lambda |w - 1/K|^2`.
pub fn weighted_objective(losses: &[f64], w: &[f64], lambda: f64) -> f64 {
    let u = 1.0 / losses.len() as f64;
    dot(w, losses) - lambda * w.iter().map(|v| (v - u).powi(2)).sum::<f64>()
}

/// Closed-form maximizer over the simplex of [`weighted_objective`]:
/// `project_simplex(1/K + losses / (2 lambda))`.
pub fn inner_max_weights(losses: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::Invalid(format!(
            "lambda must be positive for the closed form, got {lambda}; use inner_max_argmax for lambda = 0"
        )));
    }
    if losses.is_empty() {
        return Err(Error::InvalidDimension("no pair losses".into()));
    }
    let u = 1.0 / losses.len() as f64;
    let c: Vec<f64> = losses.iter().map(|f| u + f / (2.0 * lambda)).collect();
    Ok(project_simplex(&c)?.into_inner())
}

/// The `lambda = 0` limit: all weight on the largest loss (first index on ties).
pub fn inner_max_argmax(losses: &[f64]) -> Result<Vec<f64>> {
    if losses.is_empty() {
        return Err(Error::InvalidDimension("no pair losses".into()));
    }
    let best = losses
        .iter()
        .enumerate()
        .fold(0, |b, (k, v)| if *v > losses[b] { k } else { b });
    let mut w = vec![0.0; losses.len()];
    w[best] = 1.0;
    Ok(w)
}

fn inner_max_for(losses: &[f64], lambda: f64) -> Vec<f64> {
    if lambda > 0.0 {
        inner_max_weights(losses, lambda).unwrap_or_else(|_| vec![f64::NAN; losses.len()])
    } else {
        inner_max_argmax(losses).unwrap_or_default()
    }
}

struct EnsembleOracle {
    spec: EnsembleProblemSpec,
    dim: usize,
}

impl StochasticOracle for EnsembleOracle {
    fn dim_x(&self) -> usize {
        self.dim
    }
    fn dim_y(&self) -> usize {
        self.spec.pairs()
    }
    fn sample_count(&self) -> usize {
        0
    }
    fn eval(&self, x: &[f64], w: &[f64], _: &[usize]) -> f64 {
        weighted_objective(&pair_losses(&self.spec, x), w, self.spec.lambda)
    }
}

/// Builds `min_x max_w sum_ij w_ij F_ij(x) - lambda |w - 1/(IJ)|^2` with `x` in the
/// l-infinity ball of radius `epsilon` and `w` on the simplex.
///
/// Only function values are exposed for `x`; `w` has an analytic gradient, the closed-form
/// inner maximizer and the per-pair components. Metrics: `attack_loss` (the reduced
/// objective `max_w f(x, w)`), `worst_pair` and `pair_<i>_<j>`.
pub fn ensemble_problem(spec: &EnsembleProblemSpec) -> Result<MinMaxProblem> {
    let dim = spec.validate()?;
    let k = spec.pairs();
    let lambda = spec.lambda;
    let shared = Arc::new(spec.clone());
    let oracle = Arc::new(EnsembleOracle {
        spec: spec.clone(),
        dim,
    });
    let mut problem = MinMaxProblem::new(
        "ensemble",
        oracle,
        ConstraintSet::linf_ball(dim, spec.epsilon)?,
        ConstraintSet::new_simplex(k)?,
    )?;
    let s = shared.clone();
    problem = problem.with_grad_y(move |x, w| {
        let u = 1.0 / w.len() as f64;
        pair_losses(&s, x)
            .iter()
            .zip(w)
            .map(|(f, wk)| f - 2.0 * lambda * (wk - u))
            .collect()
    });
    let s = shared.clone();
    problem = problem.with_inner_max(move |x| inner_max_for(&pair_losses(&s, x), lambda));
    let s = shared.clone();
    problem = problem.with_components(move |x| pair_losses(&s, x));
    let s = shared.clone();
    problem = problem.with_metric("attack_loss", move |x, _| {
        let f = pair_losses(&s, x);
        weighted_objective(&f, &inner_max_for(&f, lambda), lambda)
    });
    let s = shared.clone();
    problem = problem.with_metric("worst_pair", move |x, _| {
        pair_losses(&s, x).into_iter().fold(f64::NEG_INFINITY, f64::max)
    });
    for i in 0..spec.groups.len() {
        for j in 0..spec.models.len() {
            let s = shared.clone();
            let idx = i * spec.models.len() + j;
            problem = problem.with_metric(format!("pair_{i}_{j}"), move |x, _| pair_losses(&s, x)[idx]);
        }
    }
    Ok(problem)
}
