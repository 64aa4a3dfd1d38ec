use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ghostlet_cli::{resolve, run, ExperimentKind, Overrides};

/// Ridgelet ghost experiments.
#[derive(Parser, Debug)]
#[command(name = "ghostlet", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: ExperimentKind,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Must agree with the subcommand when given.
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let overrides = Overrides { seed: args.seed, out: args.out, experiment: args.experiment };
    let outcome = resolve(args.subcommand, &args.config, &overrides).map_err(|e| (None, e)).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            println!("{}: {} checks passed, {} artifacts", report.experiment, report.checks.len(), report.artifacts.len());
            ExitCode::SUCCESS
        }
        Err((report, err)) => {
            if let Some(r) = report {
                for c in r.failed_checks() {
                    eprintln!("FAILED {}: {} {} {}", c.name, c.value, c.comparison, c.tolerance);
                }
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
