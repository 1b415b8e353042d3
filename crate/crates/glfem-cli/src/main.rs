use std::io::Write;
use std::process::ExitCode;

use glfem_cli::config::{parse_args, StudyMode, USAGE};
use glfem_cli::report::emit_csv;
use glfem_cli::{run_convergence_study, run_stability_study, CliError};

fn run() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return Ok(());
    }
    let config = parse_args(&args)?;
    let report = match config.mode {
        StudyMode::Convergence => run_convergence_study(&config)?,
        StudyMode::Stability => run_stability_study(&config)?,
    };
    match &config.out {
        Some(path) => {
            emit_csv(&report, path)?;
            eprintln!("[glfem] wrote {} rows to {path}", report.rows.len());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report
                .write_csv(&mut lock)
                .and_then(|_| lock.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".to_string(),
                    source,
                })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
