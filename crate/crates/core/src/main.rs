use std::process::ExitCode;

use clap::Parser;
use ridgeless::cli::{report_check, run, Cli, Outcome};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Written { manifest, files }) => {
            println!("wrote {files} tables; manifest {}", manifest.display());
            ExitCode::SUCCESS
        }
        Ok(Outcome::Checked(lines)) => {
            if report_check(&lines, &cli.out_dir) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
