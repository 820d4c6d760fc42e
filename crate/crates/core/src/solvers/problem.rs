use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::StochasticOracle;
use crate::projections::{project, ConstraintSet};
use crate::vector::DecisionVector;

/// Analytic gradient of the expected objective with respect to one block.
pub type GradFn = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// A function of `x` alone returning a vector (inner maximizer, component losses).
pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Named scalar diagnostic evaluated on trace records.
#[derive(Clone)]
pub struct MetricHook {
    pub name: String,
    pub f: ScalarFn,
}

/// `min_{x in X} max_{y in Y} f(x, y)` with optional white-box information.
#[derive(Clone)]
pub struct MinMaxProblem {
    pub name: String,
    pub oracle: Arc<dyn StochasticOracle>,
    pub x_set: ConstraintSet,
    pub y_set: ConstraintSet,
    pub grad_x: Option<GradFn>,
    pub grad_y: Option<GradFn>,
    /// `x -> argmax_y f(x, y)`.
    pub inner_max: Option<VecFn>,
    /// `x -> [F_1(x), ..., F_m(x)]`, the components of a finite-sum loss.
    pub components: Option<VecFn>,
    pub metrics: Vec<MetricHook>,
}

impl fmt::Debug for MinMaxProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MinMaxProblem")
            .field("name", &self.name)
            .field("dim_x", &self.oracle.dim_x())
            .field("dim_y", &self.oracle.dim_y())
            .field("samples", &self.oracle.sample_count())
            .field("grad_x", &self.grad_x.is_some())
            .field("grad_y", &self.grad_y.is_some())
            .field("inner_max", &self.inner_max.is_some())
            .field("components", &self.components.is_some())
            .field(
                "metrics",
                &self.metrics.iter().map(|m| m.name.as_str()).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl MinMaxProblem {
    pub fn new(
        name: impl Into<String>,
        oracle: Arc<dyn StochasticOracle>,
        x_set: ConstraintSet,
        y_set: ConstraintSet,
    ) -> Result<Self> {
        if x_set.dim() != oracle.dim_x() {
            return Err(Error::InvalidDimension(format!(
                "x constraint set has dimension {}, oracle expects {}",
                x_set.dim(),
                oracle.dim_x()
            )));
        }
        if y_set.dim() != oracle.dim_y() {
            return Err(Error::InvalidDimension(format!(
                "y constraint set has dimension {}, oracle expects {}",
                y_set.dim(),
                oracle.dim_y()
            )));
        }
        Ok(MinMaxProblem {
            name: name.into(),
            oracle,
            x_set,
            y_set,
            grad_x: None,
            grad_y: None,
            inner_max: None,
            components: None,
            metrics: Vec::new(),
        })
    }

    pub fn with_grad_x(mut self, g: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad_x = Some(Arc::new(g));
        self
    }

    pub fn with_grad_y(mut self, g: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad_y = Some(Arc::new(g));
        self
    }

    pub fn with_inner_max(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.inner_max = Some(Arc::new(g));
        self
    }

    pub fn with_components(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.components = Some(Arc::new(g));
        self
    }

    pub fn with_metric(
        mut self,
        name: impl Into<String>,
        f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.metrics.push(MetricHook {
            name: name.into(),
            f: Arc::new(f),
        });
        self
    }

    pub fn dim_x(&self) -> usize {
        self.oracle.dim_x()
    }

    pub fn dim_y(&self) -> usize {
        self.oracle.dim_y()
    }

    /// True when only function values are available for `x`.
    pub fn is_oracle_only(&self) -> bool {
        self.grad_x.is_none()
    }

    /// Default starting point for `x`: the projection of the origin onto `X`.
    pub fn default_x0(&self) -> Result<DecisionVector> {
        project(&self.x_set, &vec![0.0; self.dim_x()])
    }

    /// Default starting point for `y`: the center of `Y`.
    pub fn default_y0(&self) -> DecisionVector {
        self.y_set.center()
    }

    pub fn metric_names(&self) -> Vec<String> {
        self.metrics.iter().map(|m| m.name.clone()).collect()
    }
}
