mod app;
mod args;
mod term;

use std::process::ExitCode;

fn main() -> ExitCode {
    let plan = match args::parse_args(std::env::args_os()) {
        Ok(plan) => plan,
        Err(args::UsageError::Clap(e)) => {
            // clap renders help/version on stdout with exit 0, errors on
            // stderr with exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
        Err(e @ args::UsageError::Invalid(_)) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match app::run(&plan) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slate: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
