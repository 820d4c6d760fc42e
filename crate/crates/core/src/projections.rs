//! Euclidean projections onto boxes, l2 balls and the probability simplex.

use crate::error::{Error, Result};
use crate::vector::{check_dim, distance, DecisionVector};

/// Residual tolerance of the simplex root search.
pub const SIMPLEX_ROOT_TOL: f64 = 1e-10;
/// Bisection iteration cap for the simplex root search.
pub const SIMPLEX_ROOT_MAX_ITERS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    L2Ball { center: Vec<f64>, radius: f64 },
    Simplex { dim: usize },
}

impl ConstraintSet {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(ConstraintSet::Box { lo, hi })
    }

    /// The cube `[-r, r]^dim`, i.e. the l-infinity ball of radius `r`.
    pub fn linf_ball(dim: usize, r: f64) -> Result<Self> {
        Self::new_box(vec![-r; dim], vec![r; dim])
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConstraintSet::L2Ball { center, radius })
    }

    pub fn new_simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSet("simplex dimension must be at least 1".into()));
        }
        Ok(ConstraintSet::Simplex { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Box { lo, .. } => lo.len(),
            ConstraintSet::L2Ball { center, .. } => center.len(),
            ConstraintSet::Simplex { dim } => *dim,
        }
    }

    /// The box midpoint, ball center or simplex barycenter.
    pub fn center(&self) -> DecisionVector {
        match self {
            ConstraintSet::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect::<Vec<_>>().into(),
            ConstraintSet::L2Ball { center, .. } => center.clone().into(),
            ConstraintSet::Simplex { dim } => vec![1.0 / *dim as f64; *dim].into(),
        }
    }

    /// Membership test with an absolute tolerance.
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.dim() {
            return false;
        }
        match self {
            ConstraintSet::Box { lo, hi } => v
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(x, (l, h))| *x >= l - tol && *x <= h + tol),
            ConstraintSet::L2Ball { center, radius } => distance(v, center) <= radius + tol,
            ConstraintSet::Simplex { .. } => v.iter().all(|&x| x >= -tol) && (v.iter().sum::<f64>() - 1.0).abs() <= tol,
        }
    }
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(Error::InvalidSet(format!(
            "box bounds have different lengths ({} and {})",
            lo.len(),
            hi.len()
        )));
    }
    for (k, (l, h)) in lo.iter().zip(hi).enumerate() {
        if !(l <= h) {
            return Err(Error::InvalidSet(format!("box bound {k}: lo {l} > hi {h}")));
        }
    }
    Ok(())
}

/// Elementwise clamp into `[lo_k, hi_k]`.
pub fn project_box(v: &[f64], lo: &[f64], hi: &[f64]) -> Result<DecisionVector> {
    check_box(lo, hi)?;
    check_dim("project_box", lo.len(), v.len())?;
    Ok(v.iter()
        .zip(lo.iter().zip(hi))
        .map(|(x, (l, h))| x.clamp(*l, *h))
        .collect::<Vec<_>>()
        .into())
}

pub fn project_l2_ball(v: &[f64], center: &[f64], radius: f64) -> Result<DecisionVector> {
    check_dim("project_l2_ball", center.len(), v.len())?;
    if !(radius > 0.0) {
        return Err(Error::InvalidSet(format!("ball radius must be positive, got {radius}")));
    }
    let dist = distance(v, center);
    if dist <= radius {
        return Ok(v.to_vec().into());
    }
    let s = radius / dist;
    Ok(v.iter()
        .zip(center)
        .map(|(x, c)| c + s * (x - c))
        .collect::<Vec<_>>()
        .into())
}

fn simplex_mass(c: &[f64], mu: f64) -> f64 {
    c.iter().map(|&ci| (ci - mu).max(0.0)).sum()
}

/// Root `mu` of `sum_i max(0, c_i - mu) = 1`, found by bisection.
///
/// The map is continuous and nonincreasing; it is at least 1 at
/// `min(c) - 1` and 0 at `max(c)`, which brackets the root.
pub fn simplex_root(c: &[f64]) -> Result<f64> {
    if c.is_empty() {
        return Err(Error::Invalid("simplex_root needs a nonempty vector".into()));
    }
    if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("simplex_root got non-finite entry {bad}")));
    }
    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = c.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (min - 1.0, max);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..SIMPLEX_ROOT_MAX_ITERS {
        mid = 0.5 * (lo + hi);
        let r = simplex_mass(c, mid) - 1.0;
        if r.abs() <= SIMPLEX_ROOT_TOL {
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * max.abs().max(1.0) {
            break;
        }
    }
    // Exact solve on the active set found by bisection. The mass is
    // piecewise linear, so this removes the last bits of bisection error.
    let active: Vec<f64> = c.iter().copied().filter(|&ci| ci > mid).collect();
    if !active.is_empty() {
        let refined = (active.iter().sum::<f64>() - 1.0) / active.len() as f64;
        if (simplex_mass(c, refined) - 1.0).abs() <= (simplex_mass(c, mid) - 1.0).abs() {
            mid = refined;
        }
    }
    Ok(mid)
}

/// Euclidean projection onto `{w | sum w = 1, w >= 0}`: `w = [v - mu 1]_+`.
pub fn project_simplex(v: &[f64]) -> Result<DecisionVector> {
    let mu = simplex_root(v)?;
    Ok(v.iter().map(|&x| (x - mu).max(0.0)).collect::<Vec<_>>().into())
}

/// Projection onto any [`ConstraintSet`].
pub fn project(set: &ConstraintSet, v: &[f64]) -> Result<DecisionVector> {
    check_dim("project", set.dim(), v.len())?;
    match set {
        ConstraintSet::Box { lo, hi } => project_box(v, lo, hi),
        ConstraintSet::L2Ball { center, radius } => project_l2_ball(v, center, *radius),
        ConstraintSet::Simplex { .. } => project_simplex(v),
    }
}
