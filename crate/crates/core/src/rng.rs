//! Seeded random streams and the sampling primitives used by the estimators.
//!
//! Every random quantity in the crate is drawn through [`RngStream`], so two
//! runs with the same seed consume identical draw sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::vector::DecisionVector;

/// A single-owner seeded random stream with a draw counter.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    position: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            position: 0,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An independent stream derived from this stream's seed and a label.
    pub fn derive(&self, label: u64) -> Self {
        RngStream::new(splitmix(self.seed ^ splitmix(label)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of scalar draws taken so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.position += 1;
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.position += 1;
        self.inner.random::<f64>()
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform on `[0, n)`; `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.position += 1;
        self.inner.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        // Fisher-Yates through `index` so the draw counter stays exact.
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform direction on the unit sphere in `R^d` (normalized Gaussian).
pub fn draw_unit_sphere(d: usize, rng: &mut RngStream) -> Result<DecisionVector> {
    if d == 0 {
        return Err(Error::InvalidDimension("sphere dimension must be at least 1".into()));
    }
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let n = crate::vector::norm(&g);
        // A zero Gaussian vector has probability zero; redraw if it happens.
        if n > 0.0 && n.is_finite() {
            return Ok(DecisionVector::new(g.into_iter().map(|v| v / n).collect()));
        }
    }
}

/// Uniform point in the unit ball: a sphere direction scaled by `U^(1/d)`.
pub fn draw_unit_ball(d: usize, rng: &mut RngStream) -> Result<DecisionVector> {
    let mut v = draw_unit_sphere(d, rng)?;
    let r = rng.uniform().powf(1.0 / d as f64);
    v.iter_mut().for_each(|c| *c *= r);
    Ok(v)
}

/// `b` i.i.d. indices uniform on `[0, n)`, drawn with replacement.
pub fn draw_minibatch(n: usize, b: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Invalid("minibatch population must be nonempty".into()));
    }
    if b == 0 {
        return Err(Error::Invalid("minibatch size must be at least 1".into()));
    }
    Ok((0..b).map(|_| rng.index(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_in_one_dimension_is_a_sign() {
        let mut rng = RngStream::new(3);
        for _ in 0..100 {
            let u = draw_unit_sphere(1, &mut rng).unwrap();
            assert!(u[0] == 1.0 || u[0] == -1.0);
        }
    }

    #[test]
    fn sphere_draws_have_unit_norm() {
        let mut rng = RngStream::new(11);
        for d in [1, 2, 3, 10, 100] {
            for _ in 0..200 {
                let u = draw_unit_sphere(d, &mut rng).unwrap();
                assert!((u.norm() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let mut rng = RngStream::new(0);
        assert!(matches!(draw_unit_sphere(0, &mut rng), Err(Error::InvalidDimension(_))));
        assert!(draw_minibatch(0, 3, &mut rng).is_err());
    }

    #[test]
    fn sphere_mean_is_zero() {
        let mut rng = RngStream::new(2024);
        let m = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..m {
            let u = draw_unit_sphere(3, &mut rng).unwrap();
            for k in 0..3 {
                mean[k] += u[k] / m as f64;
            }
        }
        // Each coordinate has variance 1/d.
        let tol = 3.0 / (3.0 * m as f64).sqrt();
        for v in mean {
            assert!(v.abs() < tol, "{v} vs {tol}");
        }
    }

    #[test]
    fn sphere_covariance_is_identity_over_d() {
        for d in [2usize, 5] {
            let mut rng = RngStream::new(77 + d as u64);
            let m = 100_000;
            let mut cov = vec![vec![0.0; d]; d];
            for _ in 0..m {
                let u = draw_unit_sphere(d, &mut rng).unwrap();
                for i in 0..d {
                    for j in 0..d {
                        cov[i][j] += u[i] * u[j] / m as f64;
                    }
                }
            }
            let df = d as f64;
            for i in 0..d {
                for j in 0..d {
                    // Standard error of the sample mean of u_i u_j.
                    // Diagonal: Var(u_i^2) = 3/(d(d+2)) - 1/d^2; off-diagonal: 1/(d(d+2)).
                    let var = if i == j {
                        3.0 / (df * (df + 2.0)) - 1.0 / (df * df)
                    } else {
                        1.0 / (df * (df + 2.0))
                    };
                    let se = (var / m as f64).sqrt();
                    let target = if i == j { 1.0 / df } else { 0.0 };
                    assert!(
                        (cov[i][j] - target).abs() < 3.0 * se,
                        "d={d} ({i},{j}) {} vs {target}",
                        cov[i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn minibatch_single_population() {
        let mut rng = RngStream::new(5);
        assert_eq!(draw_minibatch(1, 3, &mut rng).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn minibatch_range() {
        let mut rng = RngStream::new(6);
        let idx = draw_minibatch(10, 5, &mut rng).unwrap();
        assert_eq!(idx.len(), 5);
        assert!(idx.iter().all(|&i| i < 10));
    }

    #[test]
    fn minibatch_is_uniform() {
        let mut rng = RngStream::new(8);
        let m = 100_000;
        let idx = draw_minibatch(4, m, &mut rng).unwrap();
        let mut counts = [0usize; 4];
        for i in idx {
            counts[i] += 1;
        }
        let expected = m as f64 / 4.0;
        let sigma = (m as f64 * 0.25 * 0.75).sqrt();
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sigma);
        }
        // 3 degrees of freedom; 99.9% quantile is 16.27.
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }

    #[test]
    fn equal_seeds_reproduce() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..50 {
            assert_eq!(
                draw_unit_sphere(4, &mut a).unwrap(),
                draw_unit_sphere(4, &mut b).unwrap()
            );
            assert_eq!(a.index(17), b.index(17));
        }
        assert_eq!(a.position(), b.position());
    }

    #[test]
    fn ball_draws_stay_inside() {
        let mut rng = RngStream::new(9);
        for _ in 0..1000 {
            assert!(draw_unit_ball(3, &mut rng).unwrap().norm() <= 1.0);
        }
    }
}
