//! Data poisoning against a logistic regression model on synthetic data.

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::StochasticOracle;
use crate::projections::ConstraintSet;
use crate::rng::RngStream;
use crate::solvers::MinMaxProblem;
use crate::vector::dot;

/// Half-width of the box that keeps the model weights compact.
pub const THETA_BOUND: f64 = 100.0;
const NOISE_VARIANCE: f64 = 1e-3;
const TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Gaussian features with labels from a noisy sigmoid rule, split 70/30.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLogRegData {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Training row indices, ascending.
    pub train: Vec<usize>,
    /// Test row indices, ascending.
    pub test: Vec<usize>,
    pub theta_star: Vec<f64>,
    pub noise_variance: f64,
}

impl SyntheticLogRegData {
    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn rows(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }

    /// Writes the CSV with header `f0..f{d-1},label,split`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        let mut header: Vec<String> = (0..self.dim()).map(|k| format!("f{k}")).collect();
        header.push("label".into());
        header.push("split".into());
        w.write_record(&header).map_err(io)?;
        let mut split = vec![Split::Test; self.n()];
        self.train.iter().for_each(|&i| split[i] = Split::Train);
        for (i, row) in self.features.iter().enumerate() {
            let mut rec: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            rec.push(self.labels[i].to_string());
            rec.push(split[i].as_str().into());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads a file written by [`write_csv`](Self::write_csv). `theta_star` is the all-ones vector.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
        let header = r.headers().map_err(|e| err(e.to_string()))?.clone();
        let d = header
            .len()
            .checked_sub(2)
            .filter(|&d| d > 0)
            .ok_or_else(|| err("too few columns".into()))?;
        let expected = (0..d).map(|k| format!("f{k}")).chain(["label".into(), "split".into()]);
        if !header.iter().zip(expected).all(|(h, e)| h == e) {
            return Err(err("header must be f0..f{d-1},label,split".into()));
        }
        let mut data = SyntheticLogRegData {
            features: Vec::new(),
            labels: Vec::new(),
            train: Vec::new(),
            test: Vec::new(),
            theta_star: vec![1.0; d],
            noise_variance: NOISE_VARIANCE,
        };
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            let line = i + 2;
            let row = (0..d)
                .map(|k| rec[k].parse::<f64>().map_err(|e| err(format!("line {line}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let label = match &rec[d] {
                "0" => 0,
                "1" => 1,
                other => return Err(err(format!("line {line}: bad label {other:?}"))),
            };
            match &rec[d + 1] {
                "train" => data.train.push(i),
                "test" => data.test.push(i),
                other => return Err(err(format!("line {line}: bad split {other:?}"))),
            }
            data.features.push(row);
            data.labels.push(label);
        }
        Ok(data)
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Cross-entropy of a sigmoid model with logit `s` against label `t`, computed stably.
fn cross_entropy(s: f64, t: u8) -> f64 {
    // log(1 + e^{-s}) for t = 1, log(1 + e^{s}) for t = 0.
    let z = if t == 1 { -s } else { s };
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Draws `n` rows in `d` dimensions: `z ~ N(0, I)`, `t = 1` iff `sigmoid(z'1 + nu) > 0.5`
/// with `nu ~ N(0, 1e-3)`, then a random 70/30 split.
pub fn gen_synthetic_logreg(n: usize, d: usize, seed: u64) -> Result<SyntheticLogRegData> {
    if n < 10 {
        return Err(Error::Invalid(format!("need at least 10 samples, got {n}")));
    }
    if d == 0 {
        return Err(Error::InvalidDimension("feature dimension must be positive".into()));
    }
    let mut rng = RngStream::new(seed);
    let theta_star = vec![1.0; d];
    let sd = NOISE_VARIANCE.sqrt();
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let z: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let nu = sd * rng.standard_normal();
        labels.push(u8::from(sigmoid(dot(&z, &theta_star) + nu) > 0.5));
        features.push(z);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    let n_train = (TRAIN_FRACTION * n as f64).round() as usize;
    let mut train = perm[..n_train].to_vec();
    let mut test = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SyntheticLogRegData {
        features,
        labels,
        train,
        test,
        theta_star,
        noise_variance: NOISE_VARIANCE,
    })
}

/// Fraction of rows in `split` whose prediction `sigmoid(z'theta) > 0.5` matches the label.
pub fn test_accuracy(theta: &[f64], data: &SyntheticLogRegData, split: Split) -> Result<f64> {
    if theta.len() != data.dim() {
        return Err(Error::InvalidDimension(format!(
            "theta has {} entries, data has {} features",
            theta.len(),
            data.dim()
        )));
    }
    let rows = data.rows(split);
    if rows.is_empty() {
        return Err(Error::Invalid(format!("the {} split is empty", split.as_str())));
    }
    let hits = rows
        .iter()
        .filter(|&&i| u8::from(sigmoid(dot(&data.features[i], theta)) > 0.5) == data.labels[i])
        .count();
    Ok(hits as f64 / rows.len() as f64)
}

/// Ridge-regularized logistic regression on the clean training split by full-batch
/// gradient descent from zero.
pub fn fit_clean_model(data: &SyntheticLogRegData, lambda: f64, lr: f64, iters: usize) -> Vec<f64> {
    let d = data.dim();
    let n = data.train.len() as f64;
    let mut theta = vec![0.0; d];
    let mut grad = vec![0.0; d];
    for _ in 0..iters {
        grad.iter_mut().zip(&theta).for_each(|(g, t)| *g = 2.0 * lambda * t);
        for &i in &data.train {
            let z = &data.features[i];
            let r = (sigmoid(dot(z, &theta)) - f64::from(data.labels[i])) / n;
            grad.iter_mut().zip(z).for_each(|(g, zk)| *g += r * zk);
        }
        theta.iter_mut().zip(&grad).for_each(|(t, g)| *t -= lr * g);
    }
    theta
}

#[derive(Debug, Clone)]
pub struct PoisonProblemSpec {
    pub data: Arc<SyntheticLogRegData>,
    /// Fraction of training rows that receive the perturbation.
    pub ratio: f64,
    /// l-infinity bound on the perturbation.
    pub epsilon: f64,
    /// Ridge coefficient on the model weights.
    pub lambda: f64,
    /// Seed of the shuffle that picks the poisoned rows.
    pub subset_seed: u64,
}

struct PoisonOracle {
    data: Arc<SyntheticLogRegData>,
    poisoned: Vec<bool>,
    /// Row weights making a uniform draw over training rows unbiased for the
    /// sum of the two per-subset mean losses.
    weight: Vec<f64>,
    lambda: f64,
}

impl PoisonOracle {
    fn row_loss(&self, k: usize, theta: &[f64], x_theta: f64) -> f64 {
        let i = self.data.train[k];
        let mut s = dot(&self.data.features[i], theta);
        if self.poisoned[k] {
            s += x_theta;
        }
        self.weight[k] * cross_entropy(s, self.data.labels[i])
    }

    /// Per-row residuals `sigmoid(s) - t` scaled by the row weight over the training split.
    fn residuals(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let x_theta = dot(x, theta);
        (0..self.data.train.len())
            .map(|k| {
                let i = self.data.train[k];
                let mut s = dot(&self.data.features[i], theta);
                if self.poisoned[k] {
                    s += x_theta;
                }
                self.weight[k] * (sigmoid(s) - f64::from(self.data.labels[i]))
            })
            .collect()
    }

    fn grad_x(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let r = self.residuals(x, theta);
        let n = r.len() as f64;
        let c: f64 = r
            .iter()
            .zip(&self.poisoned)
            .filter(|(_, &p)| p)
            .map(|(v, _)| v)
            .sum::<f64>()
            / n;
        theta.iter().map(|t| -c * t).collect()
    }

    fn grad_theta(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let r = self.residuals(x, theta);
        let n = r.len() as f64;
        let mut g: Vec<f64> = theta.iter().map(|t| -2.0 * self.lambda * t).collect();
        let mut poison_sum = 0.0;
        for (k, rk) in r.iter().enumerate() {
            let z = &self.data.features[self.data.train[k]];
            g.iter_mut().zip(z).for_each(|(gj, zj)| *gj -= rk * zj / n);
            if self.poisoned[k] {
                poison_sum += rk;
            }
        }
        g.iter_mut().zip(x).for_each(|(gj, xj)| *gj -= poison_sum * xj / n);
        g
    }
}

impl StochasticOracle for PoisonOracle {
    fn dim_x(&self) -> usize {
        self.data.dim()
    }
    fn dim_y(&self) -> usize {
        self.data.dim()
    }
    fn sample_count(&self) -> usize {
        self.data.train.len()
    }
    fn eval(&self, x: &[f64], theta: &[f64], samples: &[usize]) -> f64 {
        let x_theta = dot(x, theta);
        let reg = self.lambda * dot(theta, theta);
        let loss = if samples.is_empty() {
            let n = self.data.train.len();
            (0..n).map(|k| self.row_loss(k, theta, x_theta)).sum::<f64>() / n as f64
        } else {
            samples.iter().map(|&k| self.row_loss(k, theta, x_theta)).sum::<f64>() / samples.len() as f64
        };
        -(loss + reg)
    }
}

/// Builds `min_x max_theta -(F_tr(x, theta) + lambda |theta|^2)` where `F_tr` is the mean
/// cross-entropy on the poisoned rows (features shifted by `x`) plus the mean cross-entropy
/// on the clean rows.
///
/// Samples are training rows drawn uniformly; `x` lives in the l-infinity ball of radius
/// `epsilon` and `theta` in `[-100, 100]^d`. The `test_accuracy` metric scores `theta`.
pub fn poisoning_problem(spec: &PoisonProblemSpec) -> Result<MinMaxProblem> {
    if !(spec.ratio > 0.0 && spec.ratio <= 1.0) {
        return Err(Error::Invalid(format!(
            "poison ratio must lie in (0, 1], got {}",
            spec.ratio
        )));
    }
    if !(spec.epsilon > 0.0 && spec.epsilon.is_finite()) {
        return Err(Error::Invalid(format!(
            "epsilon must be positive, got {}",
            spec.epsilon
        )));
    }
    if !(spec.lambda > 0.0 && spec.lambda.is_finite()) {
        return Err(Error::Invalid(format!("lambda must be positive, got {}", spec.lambda)));
    }
    let data = spec.data.clone();
    let n_train = data.train.len();
    if n_train == 0 {
        return Err(Error::Invalid("the training split is empty".into()));
    }
    let n_poison = ((spec.ratio * n_train as f64).ceil() as usize).clamp(1, n_train);
    let mut order: Vec<usize> = (0..n_train).collect();
    RngStream::new(spec.subset_seed).shuffle(&mut order);
    let mut poisoned = vec![false; n_train];
    order[..n_poison].iter().for_each(|&k| poisoned[k] = true);
    let n_clean = n_train - n_poison;
    let weight = poisoned
        .iter()
        .map(|&p| {
            if p {
                n_train as f64 / n_poison as f64
            } else {
                n_train as f64 / n_clean as f64
            }
        })
        .collect();

    let d = data.dim();
    let oracle = Arc::new(PoisonOracle {
        data: data.clone(),
        poisoned,
        weight,
        lambda: spec.lambda,
    });
    let gx = oracle.clone();
    let gy = oracle.clone();
    let problem = MinMaxProblem::new(
        "poison",
        oracle,
        ConstraintSet::linf_ball(d, spec.epsilon)?,
        ConstraintSet::linf_ball(d, THETA_BOUND)?,
    )?
    .with_grad_x(move |x, t| gx.grad_x(x, t))
    .with_grad_y(move |x, t| gy.grad_theta(x, t))
    .with_metric("test_accuracy", move |_, theta| {
        test_accuracy(theta, &data, Split::Test).unwrap_or(f64::NAN)
    });
    Ok(problem)
}
