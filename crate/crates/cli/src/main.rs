use std::path::PathBuf;
use std::process::ExitCode;

use billiard_cli::{run, Command, RunConfig};
use clap::Parser;

/// Integrable billiards in domains bounded by confocal quadrics.
#[derive(Debug, Parser)]
#[command(name = "billiard", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON domain file.
    domain_file: PathBuf,
    /// Caustic parameter.
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Subdivision of the oracle grid.
    #[arg(long)]
    resolution: Option<usize>,
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
    let cfg = RunConfig {
        command: args.command,
        domain_path: args.domain_file,
        lambda: args.lambda,
        steps: args.steps,
        seed: args.seed,
        out_path: args.out,
        oracle_resolution: args.resolution,
    };
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
