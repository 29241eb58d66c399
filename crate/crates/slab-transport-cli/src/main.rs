use slab_transport_cli::{config, runner};
use std::process::ExitCode;

// Exit codes: 0 success, 1 run failure, 2 configuration error.
fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let options = match config::parse_args(&args) {
        Ok(options) => options,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", config::usage());
            return ExitCode::from(2);
        }
    };
    if options.help {
        println!("{}", config::usage());
        return ExitCode::SUCCESS;
    }
    let run_config = match config::parse_config(&options) {
        Ok(run_config) => run_config,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match runner::run(&run_config) {
        Ok(summary) => {
            for path in &summary.written {
                println!("wrote {}", path.display());
            }
            if summary.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for failure in &summary.failures {
                    eprintln!("run failed: {failure}");
                }
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
