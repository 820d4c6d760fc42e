//! Dense decision vectors for the minimization (`x`) and maximization (`y`) sides.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// A dense real vector. The dimension is the length of the backing storage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecisionVector(Vec<f64>);

impl DecisionVector {
    pub fn new(values: Vec<f64>) -> Self {
        DecisionVector(values)
    }

    /// Builds a vector and rejects NaN/Inf entries.
    pub fn try_new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite entry {bad}")));
        }
        Ok(DecisionVector(values))
    }

    pub fn zeros(dim: usize) -> Self {
        DecisionVector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for DecisionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DecisionVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DecisionVector {
    fn from(v: Vec<f64>) -> Self {
        DecisionVector(v)
    }
}

impl From<DecisionVector> for Vec<f64> {
    fn from(v: DecisionVector) -> Self {
        v.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::InvalidDimension(format!(
            "{what}: expected dimension {expected}, got {got}"
        )));
    }
    Ok(())
}
