use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homspec::{load_scenario, run, RunOptions, Task};

#[derive(Parser)]
#[command(name = "homspec", version, about = "Two-photon interferometric spectroscopy simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSVs, plot.py and report.txt.
    Run {
        scenario: PathBuf,
        /// Output directory (default: out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Override `grid.points`.
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Parse and check a scenario without running it.
    Validate {
        scenario: PathBuf,
    },
    ListTasks,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListTasks => {
            for t in Task::ALL {
                println!("{:<14} {}", t.name(), t.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { scenario } => match load_scenario(&scenario) {
            Ok(s) => {
                println!("{}: ok ({})", s.name, s.task);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{}: {e}", scenario.display());
                ExitCode::from(2)
            }
        },
        Command::Run { scenario, out, threads, grid_points } => {
            let mut s = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", scenario.display());
                    return ExitCode::from(2);
                }
            };
            if let Some(n) = grid_points {
                s = s.with_grid_points(n);
            }
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out").join(&s.name));
            match run(&s, &RunOptions { out_dir, threads }) {
                Ok(report) => {
                    for (k, v) in &report.diagnostics {
                        println!("{k} = {v:.6e}");
                    }
                    for w in &report.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("report: {}", report.report.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
