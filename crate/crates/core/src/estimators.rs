//! Randomized zeroth-order gradient estimation and smoothing-function references.
//!
//! The estimator averages forward differences along `q` random unit
//! directions over a minibatch of `b` samples:
//!
//! ```text
//! g = 1/(b q) * sum_j sum_i (d / mu) * [h(x + mu u_i; xi_j) - h(x; xi_j)] * u_i
//! ```
//!
//! The same minibatch is reused across all directions and each base value
//! `h(x; xi_j)` is evaluated once, so one call costs `b (q + 1)` queries.
//! The estimate is unbiased for the gradient of the smoothed function
//! `h_mu(x) = E_v[h(x + mu v)]`, `v` uniform on the unit ball.

use crate::error::{Error, Result};
use crate::oracle::{checked, QueryLedger, SideFunction};
use crate::rng::{draw_minibatch, draw_unit_ball, draw_unit_sphere, RngStream};
use crate::vector::{check_dim, DecisionVector};

/// Smoothing radius, direction count and minibatch size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub mu: f64,
    pub q: usize,
    pub b: usize,
}

impl EstimatorConfig {
    pub fn new(mu: f64, q: usize, b: usize) -> Result<Self> {
        let cfg = EstimatorConfig { mu, q, b };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Invalid(format!("mu must be positive, got {}", self.mu)));
        }
        if self.q == 0 {
            return Err(Error::Invalid("q must be at least 1".into()));
        }
        if self.b == 0 {
            return Err(Error::Invalid("b must be at least 1".into()));
        }
        Ok(())
    }

    /// Smoothing radius `min(1/sqrt(d), 1/sqrt(T))`, the one-sided schedule.
    pub fn one_sided_preset(dim: usize, iters: usize, q: usize, b: usize) -> Result<Self> {
        let mu = (1.0 / (dim as f64).sqrt()).min(1.0 / (iters as f64).sqrt());
        Self::new(mu, q, b)
    }

    /// Smoothing radius `1/(d sqrt(T))`, the two-sided schedule.
    pub fn two_sided_preset(dim: usize, iters: usize, q: usize, b: usize) -> Result<Self> {
        let mu = 1.0 / (dim as f64 * (iters as f64).sqrt());
        Self::new(mu, q, b)
    }

    /// Minibatch size actually used against a function with `sample_count` samples.
    /// Deterministic functions are evaluated once per point.
    pub fn effective_batch(&self, sample_count: usize) -> usize {
        if sample_count == 0 {
            1
        } else {
            self.b
        }
    }

    /// Oracle queries per estimator call.
    pub fn queries_per_call(&self, sample_count: usize) -> u64 {
        (self.effective_batch(sample_count) * (self.q + 1)) as u64
    }
}

/// Constants of the estimator variance bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBoundParams {
    /// Lipschitz constant of the per-sample gradient.
    pub lipschitz_grad: f64,
    /// Bound on the per-sample gradient norm.
    pub grad_norm_bound: f64,
    pub dim: usize,
}

impl VarianceBoundParams {
    pub fn new(lipschitz_grad: f64, grad_norm_bound: f64, dim: usize) -> Result<Self> {
        if !(lipschitz_grad > 0.0) || !(grad_norm_bound > 0.0) || dim == 0 {
            return Err(Error::Invalid(
                "variance bound parameters must be strictly positive".into(),
            ));
        }
        Ok(VarianceBoundParams {
            lipschitz_grad,
            grad_norm_bound,
            dim,
        })
    }
}

/// `sigma^2 = 2 eta^2 / b + (4 d eta^2 + mu^2 L^2 d^2) / q`
pub fn variance_bound(params: &VarianceBoundParams, cfg: &EstimatorConfig) -> f64 {
    let eta2 = params.grad_norm_bound * params.grad_norm_bound;
    let d = params.dim as f64;
    let l = params.lipschitz_grad;
    2.0 * eta2 / cfg.b as f64 + (4.0 * d * eta2 + cfg.mu * cfg.mu * l * l * d * d) / cfg.q as f64
}

/// Draws a minibatch and `q` sphere directions, then forms the estimate.
///
/// Random draws happen before any evaluation: minibatch first, then directions.
pub fn zo_gradient<F: SideFunction + ?Sized>(
    f: &F,
    point: &[f64],
    cfg: &EstimatorConfig,
    rng: &mut RngStream,
    ledger: &QueryLedger,
) -> Result<DecisionVector> {
    cfg.validate()?;
    check_dim("zo_gradient point", f.dim(), point.len())?;
    let batch = if f.sample_count() == 0 {
        Vec::new()
    } else {
        draw_minibatch(f.sample_count(), cfg.b, rng)?
    };
    let directions = (0..cfg.q)
        .map(|_| draw_unit_sphere(f.dim(), rng))
        .collect::<Result<Vec<_>>>()?;
    zo_gradient_with(f, point, cfg.mu, &directions, &batch, ledger)
}

/// The estimator for explicitly supplied directions and minibatch.
///
/// An empty `batch` means a single deterministic evaluation per point.
pub fn zo_gradient_with<F: SideFunction + ?Sized>(
    f: &F,
    point: &[f64],
    mu: f64,
    directions: &[DecisionVector],
    batch: &[usize],
    ledger: &QueryLedger,
) -> Result<DecisionVector> {
    let d = f.dim();
    check_dim("zo_gradient point", d, point.len())?;
    if directions.is_empty() {
        return Err(Error::Invalid("at least one direction is required".into()));
    }
    for u in directions {
        check_dim("zo_gradient direction", d, u.dim())?;
    }
    if !(mu > 0.0) {
        return Err(Error::Invalid(format!("mu must be positive, got {mu}")));
    }

    // One index set per minibatch entry; deterministic functions get one empty set.
    let singletons: Vec<[usize; 1]> = batch.iter().map(|&j| [j]).collect();
    let sample_sets: Vec<&[usize]> = if singletons.is_empty() {
        vec![&[]]
    } else {
        singletons.iter().map(|s| &s[..]).collect()
    };

    let mut base = Vec::with_capacity(sample_sets.len());
    for s in &sample_sets {
        base.push(checked(f.eval(point, s), || {
            format!("at the base point of a gradient estimate (sample {s:?})")
        })?);
    }

    let scale = d as f64 / (mu * (sample_sets.len() * directions.len()) as f64);
    let mut grad = vec![0.0; d];
    let mut shifted = vec![0.0; d];
    for u in directions {
        for (k, s) in shifted.iter_mut().enumerate() {
            *s = point[k] + mu * u[k];
        }
        let mut diff_sum = 0.0;
        for (s, h0) in sample_sets.iter().zip(&base) {
            let h = checked(f.eval(&shifted, s), || {
                format!("at a perturbed point of a gradient estimate (sample {s:?})")
            })?;
            diff_sum += h - h0;
        }
        for (g, uk) in grad.iter_mut().zip(u.iter()) {
            *g += scale * diff_sum * uk;
        }
    }
    ledger.record((sample_sets.len() * (directions.len() + 1)) as u64);
    Ok(DecisionVector::new(grad))
}

/// Monte-Carlo estimate of the smoothed value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Averages `h(x + mu v)` over uniform unit-ball draws `v`.
pub fn smoothed_value_mc<F: SideFunction + ?Sized>(
    f: &F,
    point: &[f64],
    mu: f64,
    samples: usize,
    rng: &mut RngStream,
) -> Result<SmoothedEstimate> {
    check_dim("smoothed_value_mc point", f.dim(), point.len())?;
    if samples == 0 {
        return Err(Error::Invalid("at least one Monte-Carlo sample is required".into()));
    }
    let all: Vec<usize> = (0..f.sample_count()).collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut shifted = vec![0.0; point.len()];
    for _ in 0..samples {
        let v = draw_unit_ball(point.len(), rng)?;
        for k in 0..point.len() {
            shifted[k] = point[k] + mu * v[k];
        }
        let h = checked(f.eval(&shifted, &all), || "in smoothed_value_mc".into())?;
        sum += h;
        sum_sq += h * h;
    }
    let n = samples as f64;
    let value = sum / n;
    let std_error = if samples > 1 {
        ((sum_sq - n * value * value).max(0.0) / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(SmoothedEstimate { value, std_error })
}

/// Central-difference gradient of the full objective; `2 d` evaluations.
pub fn finite_diff_reference<F: SideFunction + ?Sized>(f: &F, point: &[f64], step: f64) -> Result<DecisionVector> {
    check_dim("finite_diff_reference point", f.dim(), point.len())?;
    if !(step > 0.0) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    let all: Vec<usize> = (0..f.sample_count()).collect();
    let mut probe = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for k in 0..point.len() {
        probe[k] = point[k] + step;
        let hi = checked(f.eval(&probe, &all), || "in finite_diff_reference".into())?;
        probe[k] = point[k] - step;
        let lo = checked(f.eval(&probe, &all), || "in finite_diff_reference".into())?;
        probe[k] = point[k];
        grad.push((hi - lo) / (2.0 * step));
    }
    Ok(DecisionVector::new(grad))
}
