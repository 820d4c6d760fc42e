use std::path::Path;

use tempfile::TempDir;
use zominmax::harness::{
    compare_rows, compare_runs, parse_config, parse_config_str, read_trace_csv, render_chart, run_experiment,
    summary_values, write_trace_csv, TrialStatus,
};
use zominmax::solvers::{SolverTrace, TraceRecord};
use zominmax::Error;

fn quadratic_cfg(out: &Path, solver: &str, trials: usize) -> String {
    format!(
        "problem = quadratic\nsolver = {solver}\ny_mode = fo-pga\ndim = 3\ntheory_rates = true\n\
         mu = 0.01\nq = 2\niters = 100\nseed = 4\ntrials = {trials}\noutput = {}\n",
        out.display()
    )
}

#[test]
fn minimal_toy_config_parses() {
    let cfg = parse_config_str(
        "problem = toy\nsolver = zo-min-max\nalpha = 1e-3\nbeta = 0.05\niters = 10\nseed = 3\n",
        "toy",
        Path::new("."),
    )
    .unwrap();
    assert_eq!(cfg.solver_cfg.iters, 10);
    assert_eq!(cfg.solver_cfg.seed, 3);
    assert_eq!(cfg.trials, 1);
}

#[test]
fn negative_alpha_names_the_key() {
    let err = parse_config_str(
        "problem = toy\nsolver = zo-min-max\nalpha = -1\nbeta = 0.05\niters = 10\nseed = 3\n",
        "toy",
        Path::new("."),
    )
    .unwrap_err();
    assert!(err.is_validation());
    let msg = err.to_string();
    assert!(msg.contains("alpha") && msg.contains("line 3"), "{msg}");
}

#[test]
fn fo_solver_on_oracle_only_problem_is_rejected() {
    let err = parse_config_str(
        "problem = ensemble\nsolver = fo-min-max\nalpha = 0.05\nbeta = 0.01\niters = 10\nseed = 0\n",
        "ens",
        Path::new("."),
    )
    .unwrap_err();
    assert!(err.is_validation(), "{err}");
}

#[test]
fn unknown_key_and_missing_file() {
    let err = parse_config_str("problem = toy\nfoo = 1\n", "x", Path::new(".")).unwrap_err();
    assert!(err.to_string().contains("foo"), "{err}");
    let err = parse_config(Path::new("/nonexistent/nothing.cfg")).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
}

#[test]
fn quadratic_run_writes_consistent_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let cfg = parse_config_str(&quadratic_cfg(&out, "zo-min-max", 3), "q", dir.path()).unwrap();
    let s = run_experiment(&cfg).unwrap();
    assert_eq!(s.trials.len(), 3);
    assert!(s.trials.iter().all(|t| t.status == TrialStatus::Ok));
    let seeds: Vec<u64> = s.trials.iter().map(|t| t.seed).collect();
    assert_eq!(seeds, vec![4, 5, 6]);

    for t in &s.trials {
        let table = read_trace_csv(&t.trace_path).unwrap();
        assert_eq!(table.rows.len(), 101);
        // Deterministic objective: q + 1 queries per x-step, none for the analytic y-step.
        assert_eq!(t.queries, 100 * 3);
        // Summary values recomputed from the file equal the in-memory ones exactly.
        assert_eq!(summary_values(&table), t.values);
    }
    assert_eq!(s.total_queries, 900);
    let text = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 + 2);

    // Mean row equals the mean of the per-trial rows.
    let k = s.column_index("final_gap").unwrap();
    let mean: f64 = s.trials.iter().map(|t| t.values[k].unwrap()).sum::<f64>() / 3.0;
    assert!((s.mean[k].unwrap() - mean).abs() <= 1e-15 * mean.abs());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let cfg = parse_config_str(&quadratic_cfg(&out, "zo-min-max", 2), "q", dir.path()).unwrap();
        run_experiment(&cfg).unwrap();
        files.push((
            std::fs::read(out.join("trace_0.csv")).unwrap(),
            std::fs::read(out.join("trace_1.csv")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
}

fn record(iter: usize, gap: Option<f64>, metric: Option<f64>) -> TraceRecord {
    TraceRecord {
        iter,
        x: vec![0.0],
        y: vec![0.0],
        objective: 1.0 / (iter as f64 + 3.0),
        gap,
        queries: 2 * iter as u64,
        wall_ms: 0.0,
        metrics: vec![metric],
    }
}

fn small_trace(n: usize) -> SolverTrace {
    SolverTrace {
        solver: "zo-min-max".into(),
        metric_names: vec!["regret".into()],
        records: (0..n)
            .map(|k| {
                record(
                    k,
                    (k % 2 == 0).then_some(0.1 * k as f64 + 1e-17),
                    (k % 2 == 0).then_some(std::f64::consts::PI * k as f64),
                )
            })
            .collect(),
    }
}

#[test]
fn trace_csv_shape_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.csv");
    write_trace_csv(
        &SolverTrace {
            metric_names: vec!["regret".into()],
            ..Default::default()
        },
        &empty,
    )
    .unwrap();
    assert_eq!(
        std::fs::read_to_string(&empty).unwrap(),
        "iter,queries,wall_ms,objective,gap,regret\n"
    );

    let path = dir.path().join("three.csv");
    let trace = small_trace(3);
    write_trace_csv(&trace, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(
        text.lines().nth(2).unwrap().ends_with(",,"),
        "gap cells empty off-cadence: {text}"
    );

    let table = read_trace_csv(&path).unwrap();
    for (row, rec) in table.rows.iter().zip(&trace.records) {
        assert_eq!(row[0], Some(rec.iter as f64));
        assert_eq!(row[1], Some(rec.queries as f64));
        assert_eq!(row[3], Some(rec.objective));
        assert_eq!(row[4], rec.gap);
        assert_eq!(row[5], rec.metrics[0]);
    }
}

#[test]
fn trace_write_to_missing_directory_names_the_path() {
    let err = write_trace_csv(&small_trace(2), Path::new("/nonexistent/dir/t.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/t.csv"), "{err}");
}

#[test]
fn compare_examples() {
    let dir = TempDir::new().unwrap();
    let zo_out = dir.path().join("zo");
    let fo_out = dir.path().join("fo");
    for (out, solver) in [(&zo_out, "zo-min-max"), (&fo_out, "fo-min-max")] {
        let cfg = parse_config_str(&quadratic_cfg(out, solver, 1), "q", dir.path()).unwrap();
        run_experiment(&cfg).unwrap();
    }
    let zo = zo_out.join("trace_0.csv");
    let fo = fo_out.join("trace_0.csv");

    let single = compare_runs(&[&zo], "gap").unwrap();
    assert_eq!(single.lines().count(), 2);

    let rows = compare_rows(&[&zo, &fo], "gap").unwrap();
    assert!(rows[1].final_value < rows[0].final_value, "{rows:?}");
    assert!(rows.iter().all(|r| r.best <= r.final_value && r.settle_iter.is_some()));

    let summary = compare_rows(&[&zo_out.join("summary.csv")], "gap").unwrap();
    assert_eq!(summary[0].final_value, rows[0].final_value);

    let err = compare_runs(&[&zo, &fo], "regret").unwrap_err();
    assert!(
        err.to_string().contains("trace_0.csv") && err.to_string().contains("regret"),
        "{err}"
    );
}

#[test]
fn chart_examples() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_trace_csv(&small_trace(20), &a).unwrap();
    write_trace_csv(&small_trace(30), &b).unwrap();

    let one = dir.path().join("one.svg");
    render_chart(&[&a], "gap", &one, false).unwrap();
    let svg = std::fs::read_to_string(&one).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);

    let two = dir.path().join("two.svg");
    render_chart(&[&a, &b], "gap", &two, true).unwrap();
    let svg = std::fs::read_to_string(&two).unwrap();
    let legend = &svg[svg.find("class=\"legend\"").unwrap()..];
    assert_eq!(legend.matches("<text").count(), 2);

    let empty = dir.path().join("empty.csv");
    write_trace_csv(
        &SolverTrace {
            metric_names: vec!["regret".into()],
            ..Default::default()
        },
        &empty,
    )
    .unwrap();
    let err = render_chart(&[&empty], "gap", &dir.path().join("none.svg"), false).unwrap_err();
    assert!(err.to_string().contains("nothing to plot"), "{err}");
}
