//! Brute-force reference solvers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use zominmax::harness::{parse_config, ExperimentConfig};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Box projection by enumerating every lower/upper/free assignment.
pub fn brute_box(v: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    let d = v.len();
    let mut best = (f64::INFINITY, Vec::new());
    for code in 0..3usize.pow(d as u32) {
        let mut c = code;
        let mut w = vec![0.0; d];
        let mut ok = true;
        for k in 0..d {
            w[k] = match c % 3 {
                0 => lo[k],
                1 => hi[k],
                _ => v[k],
            };
            c /= 3;
            ok &= w[k] >= lo[k] - 1e-15 && w[k] <= hi[k] + 1e-15;
        }
        let dist = sq_dist(&w, v);
        if ok && dist < best.0 {
            best = (dist, w);
        }
    }
    best.1
}

/// Ball projection from the stationarity condition `w = (v + nu c) / (1 + nu)`,
/// with the multiplier found by bisection on `|w - c| = r`.
pub fn brute_ball(v: &[f64], c: &[f64], r: f64) -> Vec<f64> {
    let at = |nu: f64| -> Vec<f64> { v.iter().zip(c).map(|(vi, ci)| (vi + nu * ci) / (1.0 + nu)).collect() };
    if sq_dist(v, c).sqrt() <= r {
        return v.to_vec();
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while sq_dist(&at(hi), c).sqrt() > r {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sq_dist(&at(mid), c).sqrt() > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

/// Simplex projection by enumerating supports and solving the equality-constrained
/// problem on each; the best feasible candidate wins.
pub fn brute_simplex(v: &[f64]) -> Vec<f64> {
    let d = v.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1..(1usize << d) {
        let support: Vec<usize> = (0..d).filter(|k| mask >> k & 1 == 1).collect();
        let shift = (support.iter().map(|&k| v[k]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut w = vec![0.0; d];
        let mut ok = true;
        for &k in &support {
            w[k] = v[k] - shift;
            ok &= w[k] >= -1e-15;
        }
        let dist = sq_dist(&w, v);
        if ok && dist < best.0 {
            best = (dist, w);
        }
    }
    best.1
}

pub fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

/// Loads a shipped config and redirects its output into `out`.
pub fn load_config(name: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = parse_config(&config_dir().join(name)).unwrap();
    cfg.output = out.to_path_buf();
    cfg
}
