//! Two-variable sixth-degree polynomial with a robust (worst-case shift) objective.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::FnOracle;
use crate::projections::ConstraintSet;
use crate::solvers::MinMaxProblem;

/// Lower corner of the feasible region for `x`.
pub const TOY_LO: [f64; 2] = [-0.95, -0.45];
/// Upper corner of the feasible region for `x`.
pub const TOY_HI: [f64; 2] = [3.2, 4.4];
/// Radius of the perturbation ball.
pub const TOY_RADIUS: f64 = 0.5;
/// Reference robust optimum.
pub const TOY_X_STAR: [f64; 2] = [-0.195, 0.284];
/// Reference robust value `min_delta f(x* - delta)`, used by [`toy_regret`].
pub const TOY_REFERENCE_VALUE: f64 = -4.33;

/// Tolerance used when deciding whether a point lies in the feasible region.
const DOMAIN_TOL: f64 = 1e-12;

const PGD_STARTS: usize = 16;
const PGD_STEPS: usize = 500;
const PGD_STEP: f64 = 1e-2;
const GRID_N: usize = 200;

/// The polynomial `f(a, b)`.
pub fn toy_f(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let (a3, b3) = (a2 * a, b2 * b);
    let (a4, b4) = (a3 * a, b3 * b);
    let (a5, b5) = (a4 * a, b4 * b);
    let (a6, b6) = (a5 * a, b5 * b);
    -2.0 * a6 + 12.2 * a5 - 21.2 * a4 - 6.2 * a + 6.4 * a3 + 4.7 * a2 - b6 + 11.0 * b5 - 43.3 * b4
        + 10.0 * b
        + 74.8 * b3
        - 56.9 * b2
        + 4.1 * a * b
        + 0.1 * a2 * b2
        - 0.4 * b2 * a
        - 0.4 * a2 * b
}

/// Gradient of [`toy_f`].
pub fn toy_grad(a: f64, b: f64) -> [f64; 2] {
    let (a2, b2) = (a * a, b * b);
    let (a3, b3) = (a2 * a, b2 * b);
    let (a4, b4) = (a3 * a, b3 * b);
    let (a5, b5) = (a4 * a, b4 * b);
    let da = -12.0 * a5 + 61.0 * a4 - 84.8 * a3 - 6.2 + 19.2 * a2 + 9.4 * a + 4.1 * b + 0.2 * a * b2
        - 0.4 * b2
        - 0.8 * a * b;
    let db = -6.0 * b5 + 55.0 * b4 - 173.2 * b3 + 10.0 + 224.4 * b2 - 113.8 * b + 4.1 * a + 0.2 * a2 * b
        - 0.8 * a * b
        - 0.4 * a2;
    [da, db]
}

fn project_delta(d: [f64; 2]) -> [f64; 2] {
    let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if n > TOY_RADIUS {
        [d[0] * TOY_RADIUS / n, d[1] * TOY_RADIUS / n]
    } else {
        d
    }
}

fn check_domain(x: &[f64]) -> Result<()> {
    if x.len() != 2 {
        return Err(Error::InvalidDimension(format!(
            "toy point must have 2 entries, got {}",
            x.len()
        )));
    }
    let inside = (0..2).all(|k| x[k] >= TOY_LO[k] - DOMAIN_TOL && x[k] <= TOY_HI[k] + DOMAIN_TOL);
    if !inside {
        return Err(Error::Domain(format!(
            "({}, {}) lies outside the feasible region",
            x[0], x[1]
        )));
    }
    Ok(())
}

/// `min_{|delta| <= 0.5} f(x - delta)` by multi-start projected gradient descent.
///
/// Starts are the ball center and 15 points evenly spaced on the circle of radius 0.4.
pub fn toy_inner_min_pgd(x: &[f64]) -> Result<f64> {
    check_domain(x)?;
    let mut best = f64::INFINITY;
    for s in 0..PGD_STARTS {
        let mut d = if s == 0 {
            [0.0, 0.0]
        } else {
            let t = 2.0 * PI * (s - 1) as f64 / (PGD_STARTS - 1) as f64;
            [0.4 * t.cos(), 0.4 * t.sin()]
        };
        let mut local = toy_f(x[0] - d[0], x[1] - d[1]);
        for _ in 0..PGD_STEPS {
            // d/d(delta) of f(x - delta) is -grad f.
            let g = toy_grad(x[0] - d[0], x[1] - d[1]);
            d = project_delta([d[0] + PGD_STEP * g[0], d[1] + PGD_STEP * g[1]]);
            local = local.min(toy_f(x[0] - d[0], x[1] - d[1]));
        }
        best = best.min(local);
    }
    Ok(best)
}

fn polar_grid(x: &[f64], r0: f64, r1: f64, t0: f64, t1: f64, closed_angle: bool) -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let t_div = if closed_angle { GRID_N - 1 } else { GRID_N } as f64;
    for i in 0..GRID_N {
        let r = (r0 + (r1 - r0) * i as f64 / (GRID_N - 1) as f64).clamp(0.0, TOY_RADIUS);
        for j in 0..GRID_N {
            let t = t0 + (t1 - t0) * j as f64 / t_div;
            let v = toy_f(x[0] - r * t.cos(), x[1] - r * t.sin());
            if v < best.0 {
                best = (v, r, t);
            }
        }
    }
    best
}

/// `min_{|delta| <= 0.5} f(x - delta)` over a 200 x 200 polar grid (radius x angle),
/// followed by a second 200 x 200 grid spanning the neighbouring cells of the best node.
pub fn toy_inner_min_grid(x: &[f64]) -> Result<f64> {
    check_domain(x)?;
    let dr = TOY_RADIUS / (GRID_N - 1) as f64;
    let dt = 2.0 * PI / GRID_N as f64;
    let (coarse, r, t) = polar_grid(x, 0.0, TOY_RADIUS, 0.0, 2.0 * PI, false);
    let (fine, _, _) = polar_grid(x, r - dr, r + dr, t - dt, t + dt, true);
    Ok(coarse.min(fine))
}

/// Robust value `min_{|delta| <= 0.5} f(x - delta)`: the smaller of the descent and grid answers.
pub fn toy_robust_value(x: &[f64]) -> Result<f64> {
    Ok(toy_inner_min_pgd(x)?.min(toy_inner_min_grid(x)?))
}

/// Regret against the reference robust value at the reference optimum.
pub fn toy_regret(x: &[f64]) -> Result<f64> {
    Ok(TOY_REFERENCE_VALUE - toy_robust_value(x)?)
}

/// Min-max form over `x` in the feasible box and `delta` in the radius-0.5 ball:
/// `min_x max_delta -f(x - delta)`.
///
/// Deterministic oracle with analytic gradients; the `regret` metric uses the
/// descent-based inner solver only, to keep diagnostics cheap.
pub fn toy_polynomial() -> MinMaxProblem {
    let oracle = Arc::new(FnOracle::deterministic(2, 2, |x: &[f64], d: &[f64]| {
        -toy_f(x[0] - d[0], x[1] - d[1])
    }));
    let x_set = ConstraintSet::new_box(TOY_LO.to_vec(), TOY_HI.to_vec()).expect("static box");
    let y_set = ConstraintSet::new_ball(vec![0.0, 0.0], TOY_RADIUS).expect("static ball");
    MinMaxProblem::new("toy", oracle, x_set, y_set)
        .expect("static dimensions")
        .with_grad_x(|x, d| {
            let g = toy_grad(x[0] - d[0], x[1] - d[1]);
            vec![-g[0], -g[1]]
        })
        .with_grad_y(|x, d| toy_grad(x[0] - d[0], x[1] - d[1]).to_vec())
        .with_metric("regret", |x, _| match toy_inner_min_pgd(x) {
            Ok(v) => TOY_REFERENCE_VALUE - v,
            Err(_) => f64::NAN,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::finite_diff_reference;
    use crate::oracle::FnSide;
    use crate::rng::RngStream;

    #[test]
    fn origin_value_is_zero() {
        assert_eq!(toy_f(0.0, 0.0), 0.0);
        let p = toy_polynomial();
        assert_eq!(p.oracle.eval_full(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = RngStream::new(3);
        let side = FnSide::new(2, 0, |p: &[f64], _: &[usize]| toy_f(p[0], p[1]));
        for _ in 0..100 {
            let a = rng.uniform_in(TOY_LO[0], TOY_HI[0]);
            let b = rng.uniform_in(TOY_LO[1], TOY_HI[1]);
            let fd = finite_diff_reference(&side, &[a, b], 1e-5).unwrap();
            let g = toy_grad(a, b);
            let rel = ((g[0] - fd[0]).powi(2) + (g[1] - fd[1]).powi(2)).sqrt() / (g[0].hypot(g[1])).max(1.0);
            assert!(rel < 1e-5, "{a} {b}: {rel}");
        }
    }

    #[test]
    fn robust_value_at_reference_optimum() {
        // The polynomial as written gives about -4.683 here, not the reference -4.33.
        let pgd = toy_inner_min_pgd(&TOY_X_STAR).unwrap();
        let grid = toy_inner_min_grid(&TOY_X_STAR).unwrap();
        assert!((pgd - grid).abs() < 1e-3, "{pgd} {grid}");
        assert!((pgd - (-4.6830)).abs() < 2e-3, "{pgd}");
    }

    #[test]
    fn solvers_agree_far_from_optimum() {
        let pgd = toy_inner_min_pgd(&[3.0, 4.0]).unwrap();
        let grid = toy_inner_min_grid(&[3.0, 4.0]).unwrap();
        assert!((pgd - grid).abs() < 1e-2, "{pgd} {grid}");
        assert!(toy_regret(&[3.0, 4.0]).unwrap() > 0.0);
    }

    #[test]
    fn regret_is_bounded_below() {
        // The best robust value is about -4.2828, so regret never drops below -0.048.
        let mut rng = RngStream::new(11);
        for _ in 0..50 {
            let x = [
                rng.uniform_in(TOY_LO[0], TOY_HI[0]),
                rng.uniform_in(TOY_LO[1], TOY_HI[1]),
            ];
            assert!(toy_regret(&x).unwrap() >= -0.048 - 1e-3);
        }
    }

    #[test]
    fn outside_points_are_rejected() {
        assert!(matches!(toy_regret(&[5.0, 0.0]), Err(Error::Domain(_))));
        assert!(toy_regret(&[0.0]).is_err());
    }
}
