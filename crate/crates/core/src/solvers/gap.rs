use crate::error::Result;
use crate::estimators::finite_diff_reference;
use crate::oracle::{XSide, YSide};
use crate::projections::project;
use crate::vector::check_dim;

use super::MinMaxProblem;

/// Step of the central differences used when an analytic gradient is missing.
pub const GAP_FD_STEP: f64 = 1e-5;

/// Norm of the proximal gradient
/// `[(x - P_X(x - alpha grad_x f)) / alpha ; (y - P_Y(y + beta grad_y f)) / beta]`.
///
/// Uses the problem's analytic gradients when present, central differences of
/// the expected objective otherwise. Never touches the query ledger.
pub fn stationary_gap(problem: &MinMaxProblem, x: &[f64], y: &[f64], alpha: f64, beta: f64) -> Result<f64> {
    check_dim("stationary_gap x", problem.dim_x(), x.len())?;
    check_dim("stationary_gap y", problem.dim_y(), y.len())?;
    let oracle = problem.oracle.as_ref();
    let gx = match &problem.grad_x {
        Some(g) => g(x, y),
        None => finite_diff_reference(&XSide { oracle, y }, x, GAP_FD_STEP)?.into_inner(),
    };
    let gy = match &problem.grad_y {
        Some(g) => g(x, y),
        None => finite_diff_reference(&YSide { oracle, x }, y, GAP_FD_STEP)?.into_inner(),
    };

    let stepped_x: Vec<f64> = x.iter().zip(&gx).map(|(a, g)| a - alpha * g).collect();
    let stepped_y: Vec<f64> = y.iter().zip(&gy).map(|(a, g)| a + beta * g).collect();
    let px = project(&problem.x_set, &stepped_x)?;
    let py = project(&problem.y_set, &stepped_y)?;

    let sx: f64 = x.iter().zip(px.iter()).map(|(a, p)| ((a - p) / alpha).powi(2)).sum();
    let sy: f64 = y.iter().zip(py.iter()).map(|(a, p)| ((a - p) / beta).powi(2)).sum();
    Ok((sx + sy).sqrt())
}
