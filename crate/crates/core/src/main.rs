use clap::Parser;
use curvspec::cli::{run, Cli, EXIT_CONFIG};
use std::process::ExitCode;

fn main() -> ExitCode {
    let level = std::env::var("CURVSPEC_LOG").unwrap_or_else(|_| "warn".into());
    env_logger::Builder::new().parse_filters(&level).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    ExitCode::from(run(&cli))
}
