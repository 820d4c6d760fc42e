//! Strongly-convex/strongly-concave quadratic saddle with a known solution.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::oracle::StochasticOracle;
use crate::projections::ConstraintSet;
use crate::rng::RngStream;
use crate::solvers::MinMaxProblem;
use crate::vector::dot;

/// Zero-mean linear shifts added per sample: `f(x, y; k) = f(x, y) + s_k.x + r_k.y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftNoise {
    pub samples: usize,
    pub scale: f64,
    pub seed: u64,
}

/// `f(x, y) = 1/2 x'Ax + x'Cy - 1/2 y'By + p'x + r'y` on boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSaddleSpec {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub lin_x: Vec<f64>,
    pub lin_y: Vec<f64>,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    pub noise: Option<ShiftNoise>,
}

impl QuadraticSaddleSpec {
    /// Homogeneous saddle (no linear terms) on `[-r, r]` boxes.
    pub fn homogeneous(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, c: Vec<Vec<f64>>, r: f64) -> Self {
        let (dx, dy) = (a.len(), b.len());
        QuadraticSaddleSpec {
            a,
            b,
            c,
            lin_x: vec![0.0; dx],
            lin_y: vec![0.0; dy],
            x_lo: vec![-r; dx],
            x_hi: vec![r; dx],
            y_lo: vec![-r; dy],
            y_hi: vec![r; dy],
            noise: None,
        }
    }

    /// A seeded random instance in `d` dimensions per side with an interior
    /// saddle in `[-0.5, 0.5]^d` and unit boxes.
    ///
    /// Curvatures have eigenvalues in roughly `[1, 2]`; the coupling is moderate.
    pub fn testbed(d: usize, seed: u64, noise: Option<ShiftNoise>) -> Self {
        let mut rng = RngStream::new(seed);
        let spd = |rng: &mut RngStream| {
            let g = DMatrix::from_fn(d, d, |_, _| rng.standard_normal());
            let gg = &g * g.transpose();
            let top = gg.symmetric_eigenvalues().max();
            DMatrix::identity(d, d) + gg / top
        };
        let a = spd(&mut rng);
        let b = spd(&mut rng);
        let c = DMatrix::from_fn(d, d, |_, _| 0.5 * rng.standard_normal() / (d as f64).sqrt());
        let xs = DVector::from_fn(d, |_, _| rng.uniform_in(-0.5, 0.5));
        let ys = DVector::from_fn(d, |_, _| rng.uniform_in(-0.5, 0.5));
        // Stationarity: A x* + C y* + p = 0 and C' x* - B y* + r = 0.
        let p = -(&a * &xs + &c * &ys);
        let r = -(c.transpose() * &xs - &b * &ys);
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        QuadraticSaddleSpec {
            a: rows(&a),
            b: rows(&b),
            c: rows(&c),
            lin_x: p.iter().copied().collect(),
            lin_y: r.iter().copied().collect(),
            x_lo: vec![-1.0; d],
            x_hi: vec![1.0; d],
            y_lo: vec![-1.0; d],
            y_hi: vec![1.0; d],
            noise,
        }
    }
}

/// A constructed quadratic problem with its exact solution and constants.
#[derive(Debug, Clone)]
pub struct QuadraticSaddle {
    pub problem: MinMaxProblem,
    pub saddle_x: Vec<f64>,
    pub saddle_y: Vec<f64>,
    /// Strong concavity in `y`: smallest eigenvalue of `B`.
    pub gamma: f64,
    /// Largest eigenvalue of `A`.
    pub l_x: f64,
    /// `max(lambda_max(B), sigma_max(C))`.
    pub l_y: f64,
}

struct QuadraticOracle {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    lin_x: Vec<f64>,
    lin_y: Vec<f64>,
    shifts_x: Vec<Vec<f64>>,
    shifts_y: Vec<Vec<f64>>,
}

fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn matvec_t(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![0.0; cols];
    for (row, vi) in m.iter().zip(v) {
        for (o, mij) in out.iter_mut().zip(row) {
            *o += mij * vi;
        }
    }
    out
}

impl QuadraticOracle {
    fn expected(&self, x: &[f64], y: &[f64]) -> f64 {
        0.5 * dot(x, &matvec(&self.a, x)) + dot(x, &matvec(&self.c, y)) - 0.5 * dot(y, &matvec(&self.b, y))
            + dot(&self.lin_x, x)
            + dot(&self.lin_y, y)
    }

    fn grad_x(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ax = matvec(&self.a, x);
        let cy = matvec(&self.c, y);
        (0..x.len()).map(|k| ax[k] + cy[k] + self.lin_x[k]).collect()
    }

    fn grad_y(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ctx = matvec_t(&self.c, x);
        let by = matvec(&self.b, y);
        (0..y.len()).map(|k| ctx[k] - by[k] + self.lin_y[k]).collect()
    }
}

impl StochasticOracle for QuadraticOracle {
    fn dim_x(&self) -> usize {
        self.a.len()
    }
    fn dim_y(&self) -> usize {
        self.b.len()
    }
    fn sample_count(&self) -> usize {
        self.shifts_x.len()
    }
    fn eval(&self, x: &[f64], y: &[f64], samples: &[usize]) -> f64 {
        let base = self.expected(x, y);
        if samples.is_empty() || self.shifts_x.is_empty() {
            return base;
        }
        let shift: f64 = samples
            .iter()
            .map(|&k| dot(&self.shifts_x[k], x) + dot(&self.shifts_y[k], y))
            .sum();
        base + shift / samples.len() as f64
    }
}

fn to_matrix(rows: &[Vec<f64>], r: usize, c: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Invalid(format!("{name} must be {r}x{c}")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn check_spd(m: &DMatrix<f64>, name: &str) -> Result<()> {
    let sym = (m - m.transpose()).abs().max();
    if sym > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::Invalid(format!("{name} must be symmetric")));
    }
    if m.clone().cholesky().is_none() {
        return Err(Error::Invalid(format!("{name} must be positive definite")));
    }
    Ok(())
}

fn zero_mean_shifts(n: usize, d: usize, scale: f64, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut shifts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| scale * rng.standard_normal()).collect())
        .collect();
    for k in 0..d {
        let mean = shifts.iter().map(|s| s[k]).sum::<f64>() / n as f64;
        shifts.iter_mut().for_each(|s| s[k] -= mean);
    }
    shifts
}

/// Builds the quadratic min-max problem with analytic gradients and its exact saddle.
pub fn quadratic_saddle(spec: &QuadraticSaddleSpec) -> Result<QuadraticSaddle> {
    let dx = spec.a.len();
    let dy = spec.b.len();
    if dx == 0 || dy == 0 {
        return Err(Error::InvalidDimension("quadratic blocks must be nonempty".into()));
    }
    let a = to_matrix(&spec.a, dx, dx, "A")?;
    let b = to_matrix(&spec.b, dy, dy, "B")?;
    let c = to_matrix(&spec.c, dx, dy, "C")?;
    check_spd(&a, "A")?;
    check_spd(&b, "B")?;
    if spec.lin_x.len() != dx || spec.lin_y.len() != dy {
        return Err(Error::InvalidDimension("linear terms do not match the blocks".into()));
    }

    let mut kkt = DMatrix::zeros(dx + dy, dx + dy);
    kkt.view_mut((0, 0), (dx, dx)).copy_from(&a);
    kkt.view_mut((0, dx), (dx, dy)).copy_from(&c);
    kkt.view_mut((dx, 0), (dy, dx)).copy_from(&c.transpose());
    kkt.view_mut((dx, dx), (dy, dy)).copy_from(&(-&b));
    let rhs = DVector::from_iterator(dx + dy, spec.lin_x.iter().chain(&spec.lin_y).map(|v| -v));
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Invalid("stationarity system is singular".into()))?;
    let saddle_x: Vec<f64> = sol.rows(0, dx).iter().copied().collect();
    let saddle_y: Vec<f64> = sol.rows(dx, dy).iter().copied().collect();

    let x_set = ConstraintSet::new_box(spec.x_lo.clone(), spec.x_hi.clone())?;
    let y_set = ConstraintSet::new_box(spec.y_lo.clone(), spec.y_hi.clone())?;
    let strictly_inside =
        |v: &[f64], lo: &[f64], hi: &[f64]| v.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| x > l && x < h);
    if !strictly_inside(&saddle_x, &spec.x_lo, &spec.x_hi) || !strictly_inside(&saddle_y, &spec.y_lo, &spec.y_hi) {
        return Err(Error::Invalid(
            "the saddle point is not strictly inside the boxes".into(),
        ));
    }

    let gamma = b.clone().symmetric_eigenvalues().min();
    let l_x = a.clone().symmetric_eigenvalues().max();
    let sigma_c = c.clone().singular_values().max();
    let l_y = b.clone().symmetric_eigenvalues().max().max(sigma_c);

    let (shifts_x, shifts_y) = match &spec.noise {
        Some(n) if n.samples > 0 => {
            let mut rng = RngStream::new(n.seed);
            (
                zero_mean_shifts(n.samples, dx, n.scale, &mut rng),
                zero_mean_shifts(n.samples, dy, n.scale, &mut rng),
            )
        }
        _ => (Vec::new(), Vec::new()),
    };

    let oracle = Arc::new(QuadraticOracle {
        a: spec.a.clone(),
        b: spec.b.clone(),
        c: spec.c.clone(),
        lin_x: spec.lin_x.clone(),
        lin_y: spec.lin_y.clone(),
        shifts_x,
        shifts_y,
    });
    let gx = oracle.clone();
    let gy = oracle.clone();
    let (sx, sy) = (saddle_x.clone(), saddle_y.clone());
    let problem = MinMaxProblem::new("quadratic", oracle, x_set, y_set)?
        .with_grad_x(move |x, y| gx.grad_x(x, y))
        .with_grad_y(move |x, y| gy.grad_y(x, y))
        .with_metric("dist_to_saddle", move |x, y| {
            let dxs: f64 = x.iter().zip(&sx).map(|(a, b)| (a - b).powi(2)).sum();
            let dys: f64 = y.iter().zip(&sy).map(|(a, b)| (a - b).powi(2)).sum();
            (dxs + dys).sqrt()
        });

    Ok(QuadraticSaddle {
        problem,
        saddle_x,
        saddle_y,
        gamma,
        l_x,
        l_y,
    })
}
