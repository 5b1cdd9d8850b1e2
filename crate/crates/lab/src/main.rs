use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nevlab::{exit, families, plot, runner};

#[derive(Parser)]
#[command(name = "nevlab", version, about = "Numerical Nevanlinna theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its tables.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Exit with 3 when any row is uncertified.
        #[arg(long)]
        strict: bool,
    },
    /// List function families, operator nodes and tasks.
    ListFamilies,
    /// Extract two columns of a CSV table as plot data.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        log_x: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::ListFamilies => {
            print!("{}", families::LISTING);
            exit::OK
        }
        Command::Plot { csv, x, y, out, log_x } => match plot::plot(&csv, &out, &plot::PlotOptions { x, y, log_x }) {
            Ok(()) => exit::OK,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Command::Run { scenario, out, threads, strict } => {
            match runner::run_path(&scenario, &runner::RunOptions { out, threads, strict }) {
                Ok(o) => {
                    for t in &o.summary.tasks {
                        let verdict = t.verdict.as_deref().map(|v| format!(" ({v})")).unwrap_or_default();
                        println!("{:<18} {:<17} {}/{} certified{verdict}", t.task, t.status, t.certified_rows, t.rows);
                        for a in t.assertions.iter().filter(|a| !a.passed) {
                            println!("  failed: {}: {}", a.name, a.detail);
                        }
                        if let Some(err) = &t.error {
                            println!("  error: {err}");
                        }
                    }
                    println!("wrote {}", o.out_dir.display());
                    o.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
    };
    ExitCode::from(code)
}
