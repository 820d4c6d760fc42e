//! Experiment configuration, execution, trace persistence and reporting.

mod config;
mod experiment;
mod report;
mod trace_io;

pub use config::{
    parse_config, parse_config_str, ExperimentConfig, ProblemKind, ProblemParams, SolverKind, KEYS, OUTPUT_DIR_ENV,
};
pub use experiment::{
    build_problem, column_stats, run_experiment, run_solver, summary_columns, summary_values, write_summary,
    RunSummary, TrialStatus, TrialSummary,
};
pub use report::{compare_rows, compare_runs, render_chart, RunComparison};
pub use trace_io::{read_trace_csv, write_table, write_trace_csv, TraceTable, TRACE_COLUMNS};
