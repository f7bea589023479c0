//! Command-line surface of the coupled-NLS laboratory.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 3 usage error. Every run writes a manifest JSON next to its outputs;
//! reruns with identical manifests produce bit-identical files.

mod ops;
mod scenario;

use std::process::ExitCode;

use clap::Parser;

use scenario::{AppError, Cli};

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    // `--sweep name=v1,v2,...` fans the remaining invocation out over one
    // worker thread per value, each with its own output directory.
    let sweep = match scenario::extract_sweep(&mut argv) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match sweep {
        Some((name, values)) => {
            let workers: Vec<_> = values
                .into_iter()
                .map(|value| {
                    let mut args = argv.clone();
                    scenario::set_flag(&mut args, &name, &value);
                    let out = format!(
                        "{}/{}={}",
                        scenario::get_flag(&args, "out").unwrap_or_else(|| "out".into()),
                        name,
                        value
                    );
                    scenario::set_flag(&mut args, "out", &out);
                    std::thread::spawn(move || run(args))
                })
                .collect();
            let mut worst = ExitCode::SUCCESS;
            for w in workers {
                match w.join() {
                    Ok(code) => {
                        if code != ExitCode::SUCCESS {
                            worst = code;
                        }
                    }
                    Err(_) => worst = ExitCode::from(2),
                }
            }
            worst
        }
        None => run(argv),
    }
}

fn run(argv: Vec<String>) -> ExitCode {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are not errors.
            use clap::error::ErrorKind::*;
            if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error: usage: {}", one_line(&e.to_string()));
            return ExitCode::from(3);
        }
    };
    match ops::dispatch(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: AppError) -> ExitCode {
    eprintln!("error: {}: {}", e.kind(), one_line(&e.message()));
    ExitCode::from(e.code())
}

fn one_line(s: &str) -> String {
    s.lines().next().unwrap_or_default().to_string()
}
