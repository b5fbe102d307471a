use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use kappa_cli::job::{Cli, JobSpec};
use kappa_cli::run::run;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let job = JobSpec::from_cli(cli);
    match run(&job) {
        Ok(out) => {
            let written = match &job.output {
                Some(path) => std::fs::write(path, &out.rendered).map_err(|e| format!("cannot write {path}: {e}")),
                None => {
                    // A closed pipe (e.g. `| head`) is not an error worth reporting.
                    let mut stdout = std::io::stdout().lock();
                    let _ = stdout.write_all(out.rendered.as_bytes());
                    if !out.rendered.ends_with('\n') {
                        let _ = stdout.write_all(b"\n");
                    }
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
