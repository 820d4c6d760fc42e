//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `cargo test -p zominmax --test acceptance -- --nocapture` to see them.

mod common;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use common::{brute_ball, brute_box, brute_simplex, config_dir, load_config};
use zominmax::estimators::{variance_bound, VarianceBoundParams};
use zominmax::harness::{read_trace_csv, run_experiment, RunSummary, TrialStatus};
use zominmax::problems::{
    fit_clean_model, gen_synthetic_logreg, inner_max_weights, test_accuracy, weighted_objective, Split,
};
use zominmax::projections::simplex_root;
use zominmax::{
    project_box, project_l2_ball, project_simplex, zo_gradient, EstimatorConfig, FnSide, QueryLedger, RngStream,
};

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
    secs: f64,
}

fn check(id: usize, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t0 = Instant::now();
    let (pass, detail) = f();
    let o = Outcome {
        id,
        pass,
        detail,
        secs: t0.elapsed().as_secs_f64(),
    };
    println!(
        "AC{} {}: {} [{:.1} s]",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        o.secs
    );
    o
}

fn sq_norm(x: &[f64], _: &[usize]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn ac1_unbiasedness() -> (bool, String) {
    let d = 10;
    let h = FnSide::new(d, 0, sq_norm);
    let x: Vec<f64> = (0..d).map(|k| 0.1 * k as f64 - 0.4).collect();
    let cfg = EstimatorConfig::new(0.01, 1, 1).unwrap();
    let mut rng = RngStream::new(1);
    let ledger = QueryLedger::new();
    let n = 100_000;
    let (mut sum, mut sq) = (vec![0.0; d], vec![0.0; d]);
    for _ in 0..n {
        let g = zo_gradient(&h, &x, &cfg, &mut rng, &ledger).unwrap();
        for k in 0..d {
            sum[k] += g[k];
            sq[k] += g[k] * g[k];
        }
    }
    // The smoothed gradient of a quadratic equals its gradient.
    let mut worst: f64 = 0.0;
    for k in 0..d {
        let mean = sum[k] / n as f64;
        let se = ((sq[k] / n as f64 - mean * mean) / n as f64).sqrt();
        worst = worst.max((mean - 2.0 * x[k]).abs() / se);
    }
    (
        worst <= 3.0,
        format!("max |mean - grad| / SE over {d} coordinates = {worst:.2} (limit 3)"),
    )
}

fn ac2_variance_bound() -> (bool, String) {
    let d = 10;
    let h = FnSide::new(d, 0, sq_norm);
    // Feasible box [-1, 1]^d: |grad h| = 2|x| <= 2 sqrt(d), grad h is 2-Lipschitz.
    let params = VarianceBoundParams::new(2.0, 2.0 * (d as f64).sqrt(), d).unwrap();
    let x: Vec<f64> = (0..d).map(|k| if k % 2 == 0 { 0.7 } else { -0.3 }).collect();
    let mu = 0.01;
    let mut ok = true;
    let mut parts = Vec::new();
    for b in [1, 5] {
        for q in [1, 5] {
            let cfg = EstimatorConfig::new(mu, q, b).unwrap();
            let mut rng = RngStream::new(100 + 10 * b as u64 + q as u64);
            let ledger = QueryLedger::new();
            let trials = 10_000;
            let mut acc = 0.0;
            for _ in 0..trials {
                let g = zo_gradient(&h, &x, &cfg, &mut rng, &ledger).unwrap();
                acc += g.iter().zip(&x).map(|(gi, xi)| (gi - 2.0 * xi).powi(2)).sum::<f64>();
            }
            let emp = acc / trials as f64;
            let bound = variance_bound(&params, &cfg);
            ok &= emp <= bound;
            parts.push(format!("(b={b},q={q}) {emp:.3} <= {bound:.3}"));
        }
    }
    (ok, parts.join("; "))
}

fn ac3_projection_oracles() -> (bool, String) {
    let mut rng = RngStream::new(7);
    let mut max_err: f64 = 0.0;
    let mut max_resid: f64 = 0.0;
    for _ in 0..1000 {
        let d = 1 + rng.index(6);
        let v: Vec<f64> = (0..d).map(|_| 3.0 * rng.standard_normal()).collect();
        let lo: Vec<f64> = (0..d).map(|_| rng.uniform_in(-2.0, 0.5)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + rng.uniform_in(0.0, 2.5)).collect();
        let c: Vec<f64> = (0..d).map(|_| rng.standard_normal()).collect();
        let r = rng.uniform_in(0.1, 3.0);
        let pairs = [
            (project_box(&v, &lo, &hi).unwrap().into_inner(), brute_box(&v, &lo, &hi)),
            (project_l2_ball(&v, &c, r).unwrap().into_inner(), brute_ball(&v, &c, r)),
            (project_simplex(&v).unwrap().into_inner(), brute_simplex(&v)),
        ];
        for (a, b) in &pairs {
            for (x, y) in a.iter().zip(b) {
                max_err = max_err.max((x - y).abs());
            }
        }
        let mu = simplex_root(&v).unwrap();
        let resid = (v.iter().map(|ci| (ci - mu).max(0.0)).sum::<f64>() - 1.0).abs();
        max_resid = max_resid.max(resid);
    }
    (
        max_err <= 1e-6 && max_resid <= 1e-10,
        format!("max deviation from brute force {max_err:.2e} (limit 1e-6), max simplex residual {max_resid:.2e} (limit 1e-10)"),
    )
}

fn all_ok(s: &RunSummary) -> bool {
    s.trials.iter().all(|t| t.status == TrialStatus::Ok)
}

fn ac4_toy(out: &Path) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, label) in [("toy_one_sided.cfg", "one-sided"), ("toy_two_sided.cfg", "two-sided")] {
        let s = run_experiment(&load_config(name, &out.join(name))).unwrap();
        let best = s.mean_of("min_regret").unwrap();
        let last = s.mean_of("final_regret").unwrap();
        ok &= all_ok(&s) && best < 0.1;
        parts.push(format!("{label}: mean best regret {best:.4} (final {last:.4})"));
    }
    (ok, format!("{} (limit 0.1 against -4.33)", parts.join("; ")))
}

fn trailing_gap(dir: &Path, trials: usize, window: usize) -> f64 {
    let mut total = 0.0;
    for k in 0..trials {
        let t = read_trace_csv(&dir.join(format!("trace_{k}.csv"))).unwrap();
        let gaps = t.series("gap").unwrap();
        let tail = &gaps[gaps.len() - window..];
        total += tail.iter().map(|p| p.1).sum::<f64>() / window as f64;
    }
    total / trials as f64
}

fn ac5_plateaus(out: &Path) -> (bool, String) {
    let mut plateaus = Vec::new();
    for name in [
        "quadratic_q1.cfg",
        "quadratic_q5.cfg",
        "quadratic_q20.cfg",
        "quadratic_fo.cfg",
    ] {
        let dir = out.join(name);
        let s = run_experiment(&load_config(name, &dir)).unwrap();
        assert!(all_ok(&s));
        plateaus.push(trailing_gap(&dir, s.trials.len(), 1000));
    }
    let monotone = plateaus[0] > plateaus[1] && plateaus[1] > plateaus[2];
    let fo_below = plateaus[3] < plateaus[0].min(plateaus[1]).min(plateaus[2]);
    (
        monotone && fo_below,
        format!(
            "trailing-1000 mean gap q=1 {:.3e}, q=5 {:.3e}, q=20 {:.3e}, FO {:.3e}",
            plateaus[0], plateaus[1], plateaus[2], plateaus[3]
        ),
    )
}

fn ac6_poisoning(out: &Path) -> (bool, String) {
    let cfg = load_config("poison.cfg", &out.join("poison.cfg"));
    let data = Arc::new(gen_synthetic_logreg(cfg.params.n, cfg.params.d, cfg.params.data_seed).unwrap());
    let clean = fit_clean_model(&data, cfg.params.lambda, 1.0, 3000);
    let clean_acc = test_accuracy(&clean, &data, Split::Test).unwrap();
    let s = run_experiment(&cfg).unwrap();
    let poisoned = s.mean_of("final_test_accuracy").unwrap();
    let ok = all_ok(&s) && s.trials.len() == 10 && (clean_acc - 0.94).abs() <= 0.04 && poisoned <= 0.75;
    (
        ok,
        format!(
            "clean test accuracy {clean_acc:.3} (0.94 +/- 0.04), poisoned {poisoned:.3} over {} trials (limit 0.75)",
            s.trials.len()
        ),
    )
}

/// Per-trial mean of a metric over the last 10% of diagnostic records, averaged over trials.
fn tail_metric(dir: &Path, trials: usize, metric: &str) -> f64 {
    let mut total = 0.0;
    for k in 0..trials {
        let t = read_trace_csv(&dir.join(format!("trace_{k}.csv"))).unwrap();
        let s = t.series(metric).unwrap();
        let n = (s.len() / 10).max(1);
        total += s[s.len() - n..].iter().map(|p| p.1).sum::<f64>() / n as f64;
    }
    total / trials as f64
}

fn ac7_ensemble(out: &Path) -> (bool, String) {
    let mut vals = Vec::new();
    for name in [
        "ensemble_zo_min_max.cfg",
        "ensemble_zo_pgd.cfg",
        "ensemble_zo_finite_sum.cfg",
    ] {
        let dir = out.join(name);
        let s = run_experiment(&load_config(name, &dir)).unwrap();
        assert!(all_ok(&s));
        vals.push((
            tail_metric(&dir, s.trials.len(), "attack_loss"),
            tail_metric(&dir, s.trials.len(), "worst_pair"),
        ));
    }
    let rel = (vals[0].0 - vals[1].0).abs() / vals[1].0;
    let ok = rel <= 0.10 && vals[0].1 <= vals[2].1;
    (
        ok,
        format!(
            "attack loss min-max {:.4} vs reduced {:.4} (rel {:.3}, limit 0.10); worst pair min-max {:.4} <= finite-sum {:.4}",
            vals[0].0, vals[1].0, rel, vals[0].1, vals[2].1
        ),
    )
}

fn ac8_inner_max() -> (bool, String) {
    let mut rng = RngStream::new(8);
    let mut beaten = 0usize;
    let mut max_dev: f64 = 0.0;
    for _ in 0..100 {
        let k = 2 + rng.index(7);
        let losses: Vec<f64> = (0..k).map(|_| rng.uniform_in(0.0, 5.0)).collect();
        let lambda = rng.uniform_in(0.1, 10.0);
        let w = inner_max_weights(&losses, lambda).unwrap();
        let best = weighted_objective(&losses, &w, lambda);
        for _ in 0..10_000 {
            let e: Vec<f64> = (0..k).map(|_| -rng.uniform().max(1e-300).ln()).collect();
            let s: f64 = e.iter().sum();
            let p: Vec<f64> = e.iter().map(|v| v / s).collect();
            if weighted_objective(&losses, &p, lambda) > best + 1e-12 {
                beaten += 1;
            }
        }
        // Projected gradient ascent from the barycenter.
        let u = 1.0 / k as f64;
        let step = 1.0 / (4.0 * lambda);
        let mut p = vec![u; k];
        for _ in 0..5000 {
            let next: Vec<f64> = p
                .iter()
                .zip(&losses)
                .map(|(pi, f)| pi + step * (f - 2.0 * lambda * (pi - u)))
                .collect();
            p = project_simplex(&next).unwrap().into_inner();
        }
        for (a, b) in w.iter().zip(&p) {
            max_dev = max_dev.max((a - b).abs());
        }
    }
    (
        beaten == 0 && max_dev <= 1e-6,
        format!("random simplex points beating the closed form: {beaten} of 1e6; max deviation from ascent {max_dev:.2e} (limit 1e-6)"),
    )
}

fn ac9_reproducible(first: &Path, second: &Path) -> (bool, String) {
    let mut names: Vec<PathBuf> = std::fs::read_dir(config_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cfg"))
        .collect();
    names.sort();
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for path in &names {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let dir_a = first.join(&name);
        let dir_b = second.join(&name);
        if !dir_a.exists() {
            run_experiment(&load_config(&name, &dir_a)).unwrap();
        }
        let s = run_experiment(&load_config(&name, &dir_b)).unwrap();
        for t in &s.trials {
            let file = t.trace_path.file_name().unwrap();
            let a = std::fs::read(dir_a.join(file)).unwrap();
            let b = std::fs::read(dir_b.join(file)).unwrap();
            compared += 1;
            if a != b {
                mismatched.push(format!("{name}/{}", file.to_string_lossy()));
            }
        }
    }
    (
        mismatched.is_empty() && compared > 0,
        format!(
            "{compared} trace files from {} configs compared, {} differ {:?}",
            names.len(),
            mismatched.len(),
            mismatched
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let outcomes = vec![
        check(1, ac1_unbiasedness),
        check(2, ac2_variance_bound),
        check(3, ac3_projection_oracles),
        check(4, || ac4_toy(first.path())),
        check(5, || ac5_plateaus(first.path())),
        check(6, || ac6_poisoning(first.path())),
        check(7, || ac7_ensemble(first.path())),
        check(8, ac8_inner_max),
        check(9, || ac9_reproducible(first.path(), second.path())),
    ];
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {} of {} criteria pass",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
