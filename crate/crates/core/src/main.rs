use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zominmax::harness::{compare_runs, parse_config, render_chart, run_experiment, TrialStatus};
use zominmax::problems::gen_synthetic_logreg;
use zominmax::Error;

/// Zeroth-order min-max experiments.
#[derive(Parser)]
#[command(name = "zominmax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a key=value config file.
    Run { config: PathBuf },
    /// Tabulate final and best values of a column across trace or summary files.
    Compare {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        metric: String,
    },
    /// Draw a column of one or more traces as an SVG line chart.
    Chart {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
        /// Plot on a base-10 log scale.
        #[arg(long)]
        log: bool,
    },
    /// Export a synthetic logistic-regression dataset as CSV.
    GenData {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config } => {
            let cfg = parse_config(&config)?;
            let summary = run_experiment(&cfg)?;
            println!(
                "{} / {}: {} of {} trials ok, {} queries, output in {}",
                summary.problem,
                summary.solver,
                summary.succeeded(),
                summary.trials.len(),
                summary.total_queries,
                cfg.output.display()
            );
            for t in &summary.trials {
                if let TrialStatus::Failed(msg) = &t.status {
                    eprintln!("trial {} (seed {}) failed: {msg}", t.trial, t.seed);
                }
            }
            for (name, (mean, std)) in summary.columns.iter().zip(summary.mean.iter().zip(&summary.std)) {
                if let Some(m) = mean {
                    match std {
                        Some(s) => println!("  {name:<24} {m:.6e} +/- {s:.2e}"),
                        None => println!("  {name:<24} {m:.6e}"),
                    }
                }
            }
            if summary.succeeded() < summary.trials.len() {
                return Err(Error::TrialsFailed {
                    failed: summary.trials.len() - summary.succeeded(),
                    total: summary.trials.len(),
                });
            }
        }
        Command::Compare { traces, metric } => {
            let paths: Vec<_> = traces.iter().map(|p| p.as_path()).collect();
            print!("{}", compare_runs(&paths, &metric)?);
        }
        Command::Chart {
            traces,
            metric,
            out,
            log,
        } => {
            let paths: Vec<_> = traces.iter().map(|p| p.as_path()).collect();
            render_chart(&paths, &metric, &out, log)?;
            println!("wrote {}", out.display());
        }
        Command::GenData { n, d, seed, out } => {
            gen_synthetic_logreg(n, d, seed)?.write_csv(&out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
